//! The d-peeling algorithm, stopping sets and size classes.
//!
//! A hyperedge is *active* while its live degree lies in `[1, d-1]`. Peeling
//! repeatedly picks an active hyperedge and deletes live vertices from it
//! until no active hyperedge remains; the surviving vertices form the largest
//! d-stopping set, independently of the order in which edges were picked.

use std::collections::VecDeque;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::hypergraph::Hypergraph;
use crate::rng::{self, Rng64};
use crate::{Error, Result};

/// Largest live-vertex count accepted by [`max_stopping_set_bruteforce`].
pub const BRUTEFORCE_MAX_VERTICES: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Remove an active hyperedge together with all its live vertices; edges
    /// are served FIFO, seeded in index order.
    Batch,
    /// Remove a single uniformly chosen live vertex of a uniformly chosen
    /// active hyperedge per step. This is the schedule whose degree census is
    /// the exact Markov chain of [`crate::chains`].
    OneVertexPerStep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelConfig {
    pub d: usize,
    pub schedule: Schedule,
    pub rng_seed: u64,
    pub record_trace: bool,
}

impl PeelConfig {
    pub fn batch(d: usize) -> Self {
        PeelConfig {
            d,
            schedule: Schedule::Batch,
            rng_seed: 0,
            record_trace: false,
        }
    }

    pub fn one_vertex(d: usize, rng_seed: u64) -> Self {
        PeelConfig {
            d,
            schedule: Schedule::OneVertexPerStep,
            rng_seed,
            record_trace: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

fn check_d(d: usize, k: usize) -> Result<()> {
    if d < 2 || d > k {
        return Err(Error::param(format!("need 2 <= d <= k, got d = {d}, k = {k}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: usize,
    pub chosen_edge: u32,
    pub removed_vertices: Vec<u32>,
    pub census_after: Vec<u64>,
    pub e_low: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelTrace {
    pub d: usize,
    pub initial_census: Vec<u64>,
    pub steps: Vec<TraceStep>,
    pub removed_total: usize,
    pub remainder: Vec<u32>,
}

impl PeelTrace {
    /// `t, chosen_edge, n_removed_this_step, C_0..C_k, E_low`; the first row
    /// is the initial state with an empty `chosen_edge`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let k = self.initial_census.len() - 1;
        let mut header = vec!["t".to_string(), "chosen_edge".into(), "n_removed_this_step".into()];
        header.extend((0..=k).map(|j| format!("C_{j}")));
        header.push("E_low".into());
        out.write_record(&header)?;
        let mut row = |t: usize, edge: Option<u32>, removed: usize, census: &[u64]| {
            let mut rec = vec![t.to_string(), edge.map(|e| e.to_string()).unwrap_or_default(), removed.to_string()];
            rec.extend(census.iter().map(|c| c.to_string()));
            rec.push(e_low(census, self.d - 1).to_string());
            out.write_record(&rec)
        };
        row(0, None, 0, &self.initial_census)?;
        for s in &self.steps {
            row(s.t, Some(s.chosen_edge), s.removed_vertices.len(), &s.census_after)?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeelResult {
    /// Surviving vertices, ascending.
    pub remainder: Vec<u32>,
    /// Hyperedges with at least one surviving vertex.
    pub remainder_edges: Vec<usize>,
    /// Vertices removed by peeling (initially removed ones excluded).
    pub peeled: usize,
    pub trace: Option<PeelTrace>,
}

/// `E_1^{a}`: edges from vertices to hyperedges of live degree `1..=a`,
/// i.e. `Σ_{j=1}^{a} j·C_j`.
pub fn e_low(census: &[u64], a: usize) -> u64 {
    census
        .iter()
        .enumerate()
        .take(a + 1)
        .map(|(j, &c)| j as u64 * c)
        .sum()
}

/// Set of active hyperedges with O(1) insert, remove and uniform choice.
#[derive(Clone, Debug)]
struct ActiveSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl ActiveSet {
    const ABSENT: u32 = u32::MAX;

    fn new(m: usize) -> Self {
        ActiveSet {
            items: Vec::new(),
            pos: vec![Self::ABSENT; m],
        }
    }

    fn insert(&mut self, e: u32) {
        if self.pos[e as usize] == Self::ABSENT {
            self.pos[e as usize] = self.items.len() as u32;
            self.items.push(e);
        }
    }

    fn remove(&mut self, e: u32) {
        let p = self.pos[e as usize];
        if p == Self::ABSENT {
            return;
        }
        let last = self.items.pop().unwrap();
        if last != e {
            self.items[p as usize] = last;
            self.pos[last as usize] = p;
        }
        self.pos[e as usize] = Self::ABSENT;
    }

    fn len(&self) -> usize {
        self.items.len()
    }
}

/// Step-wise peeling engine over an owned working copy of a hypergraph.
///
/// The degree census is maintained incrementally, so reading it after every
/// step costs `O(k)`.
#[derive(Clone, Debug)]
pub struct Peeler {
    graph: Hypergraph,
    d: usize,
    census: Vec<u64>,
    active: ActiveSet,
    queue: VecDeque<u32>,
    steps: usize,
    initial_removed: usize,
}

impl Peeler {
    pub fn new(graph: Hypergraph, d: usize) -> Result<Self> {
        check_d(d, graph.k())?;
        let census = graph.degree_census();
        let mut active = ActiveSet::new(graph.m());
        let mut queue = VecDeque::new();
        for (e, &deg) in graph.live_degrees().iter().enumerate() {
            if deg >= 1 && (deg as usize) < d {
                active.insert(e as u32);
                queue.push_back(e as u32);
            }
        }
        let initial_removed = graph.removed_count();
        Ok(Peeler {
            graph,
            d,
            census,
            active,
            queue,
            steps: 0,
            initial_removed,
        })
    }

    pub fn graph(&self) -> &Hypergraph {
        &self.graph
    }

    pub fn into_graph(self) -> Hypergraph {
        self.graph
    }

    pub fn census(&self) -> &[u64] {
        &self.census
    }

    pub fn e_low(&self) -> u64 {
        e_low(&self.census, self.d - 1)
    }

    /// Number of steps performed so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_stuck(&self) -> bool {
        self.active.len() == 0
    }

    /// Vertices removed by peeling so far.
    pub fn peeled(&self) -> usize {
        self.graph.removed_count() - self.initial_removed
    }

    fn remove(&mut self, v: u32) -> bool {
        let d = self.d as u32;
        let Peeler {
            graph,
            census,
            active,
            queue,
            ..
        } = self;
        graph.remove_vertex_with(v, |e, deg| {
            census[deg as usize + 1] -= 1;
            census[deg as usize] += 1;
            if deg + 1 == d {
                active.insert(e);
                queue.push_back(e);
            } else if deg == 0 {
                active.remove(e);
            }
        })
    }

    /// One step of the single-vertex schedule. Returns the chosen edge and
    /// the removed vertex, or `None` once no active hyperedge is left.
    pub fn step_one_vertex<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<(u32, u32)> {
        if self.active.len() == 0 {
            return None;
        }
        let e = self.active.items[rng.random_range(0..self.active.len())];
        let live = self.graph.live_degree(e as usize);
        let mut pick = rng.random_range(0..live);
        let mut victim = u32::MAX;
        for &v in self.graph.edge(e as usize) {
            if !self.graph.is_removed(v) {
                if pick == 0 {
                    victim = v;
                    break;
                }
                pick -= 1;
            }
        }
        self.remove(victim);
        self.steps += 1;
        Some((e, victim))
    }

    /// One step of the batch schedule: the next queued active edge loses all
    /// of its live vertices, which are appended to `removed`.
    pub fn step_batch(&mut self, removed: &mut Vec<u32>) -> Option<u32> {
        while let Some(e) = self.queue.pop_front() {
            let deg = self.graph.live_degree(e as usize) as usize;
            if deg == 0 || deg >= self.d {
                continue;
            }
            let k = self.graph.k();
            for i in 0..k {
                let v = self.graph.edge(e as usize)[i];
                if self.remove(v) {
                    removed.push(v);
                }
            }
            self.steps += 1;
            return Some(e);
        }
        None
    }

    /// Runs the schedule to completion.
    pub fn run(&mut self, schedule: Schedule, rng: &mut Rng64, trace: Option<&mut Vec<TraceStep>>) {
        let mut trace = trace;
        let mut removed = Vec::new();
        loop {
            removed.clear();
            let chosen = match schedule {
                Schedule::Batch => self.step_batch(&mut removed),
                Schedule::OneVertexPerStep => self.step_one_vertex(rng).map(|(e, v)| {
                    removed.push(v);
                    e
                }),
            };
            let Some(e) = chosen else { break };
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(TraceStep {
                    t: self.steps,
                    chosen_edge: e,
                    removed_vertices: removed.clone(),
                    census_after: self.census.clone(),
                    e_low: self.e_low(),
                });
            }
        }
    }

    pub fn remainder(&self) -> Vec<u32> {
        self.graph.live_vertices().collect()
    }

    pub fn remainder_edges(&self) -> Vec<usize> {
        (0..self.graph.m())
            .filter(|&e| self.graph.live_degree(e) > 0)
            .collect()
    }
}

/// Runs d-peeling on a copy of `h`.
pub fn peel(h: &Hypergraph, cfg: &PeelConfig) -> Result<PeelResult> {
    peel_owned(h.clone(), cfg)
}

/// Runs d-peeling consuming `h`, avoiding a copy of large graphs.
pub fn peel_owned(h: Hypergraph, cfg: &PeelConfig) -> Result<PeelResult> {
    let mut peeler = Peeler::new(h, cfg.d)?;
    let mut rng = rng::from_seed(cfg.rng_seed);
    let initial_census = peeler.census().to_vec();
    let mut steps = cfg.record_trace.then(Vec::new);
    peeler.run(cfg.schedule, &mut rng, steps.as_mut());
    let remainder = peeler.remainder();
    let peeled = peeler.peeled();
    let trace = steps.map(|steps| PeelTrace {
        d: cfg.d,
        initial_census,
        steps,
        removed_total: peeled,
        remainder: remainder.clone(),
    });
    Ok(PeelResult {
        remainder_edges: peeler.remainder_edges(),
        remainder,
        peeled,
        trace,
    })
}

/// True iff every hyperedge meets `set` in 0 or at least `d` vertices.
pub fn is_stopping_set(h: &Hypergraph, set: &[u32], d: usize) -> Result<bool> {
    let mut member = vec![false; h.n()];
    for &v in set {
        if v as usize >= h.n() {
            return Err(Error::param(format!("vertex {v} out of range")));
        }
        if h.is_removed(v) {
            return Err(Error::param(format!("vertex {v} is removed")));
        }
        member[v as usize] = true;
    }
    Ok(h.edges().all(|e| {
        let hits = e.iter().filter(|&&v| member[v as usize]).count();
        hits == 0 || hits >= d
    }))
}

/// Largest d-stopping set by exhaustive search over subsets of the live
/// vertices, largest subsets first.
pub fn max_stopping_set_bruteforce(h: &Hypergraph, d: usize) -> Result<Vec<u32>> {
    let live: Vec<u32> = h.live_vertices().collect();
    if live.len() > BRUTEFORCE_MAX_VERTICES {
        return Err(Error::Capacity(format!(
            "{} live vertices exceed the brute-force limit of {BRUTEFORCE_MAX_VERTICES}",
            live.len()
        )));
    }
    let mut bit = vec![u32::MAX; h.n()];
    for (i, &v) in live.iter().enumerate() {
        bit[v as usize] = i as u32;
    }
    let mut masks: Vec<u32> = h
        .edges()
        .map(|e| {
            e.iter()
                .filter(|&&v| bit[v as usize] != u32::MAX)
                .fold(0u32, |m, &v| m | 1 << bit[v as usize])
        })
        .filter(|&m| m != 0)
        .collect();
    masks.sort_unstable();
    masks.dedup();

    let n = live.len() as u32;
    let ok = |s: u32| {
        masks.iter().all(|&m| {
            let c = (m & s).count_ones() as usize;
            c == 0 || c >= d
        })
    };
    for size in (1..=n).rev() {
        let mut s: u32 = (1u32 << size) - 1;
        let end = 1u64 << n;
        while (s as u64) < end {
            if ok(s) {
                return Ok((0..n).filter(|i| s >> i & 1 == 1).map(|i| live[i as usize]).collect());
            }
            // Gosper's hack: next subset with the same popcount.
            let c = s & s.wrapping_neg();
            let r = s as u64 + c as u64;
            if r >= end {
                break;
            }
            let r = r as u32;
            s = (((r ^ s) >> 2) / c) | r;
        }
    }
    Ok(Vec::new())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    Empty,
    Small,
    Linear,
    Large,
}

/// Buckets a stopping-set size relative to `alpha·n`: small up to
/// `⌈αn⌉`, large from `⌊(1-α)n⌋ + 1`, linear in between.
pub fn classify_size(size: usize, n: usize, alpha: f64) -> Result<SizeClass> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::param(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    // Snap products that are integers up to rounding (0.7 * 10 = 7.000000000000001).
    let snap = |x: f64| {
        let r = x.round();
        if (x - r).abs() < 1e-9 * x.abs().max(1.0) {
            r
        } else {
            x
        }
    };
    let small_max = snap(alpha * n as f64).ceil() as usize;
    let linear_max = snap((1.0 - alpha) * n as f64).floor() as usize;
    Ok(if size == 0 {
        SizeClass::Empty
    } else if size <= small_max {
        SizeClass::Small
    } else if size <= linear_max {
        SizeClass::Linear
    } else {
        SizeClass::Large
    })
}
