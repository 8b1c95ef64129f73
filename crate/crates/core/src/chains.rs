//! Count-level simulation of the degree-census Markov chains.
//!
//! Three chains are provided, all driven by exact binomial draws:
//!
//! - the *exact* chain on `[C_0, …, C_k]`, whose law is that of the census
//!   of one-vertex-per-step peeling on `G_k(n, m, ℓ)`;
//! - the *dominating* chain on `(Ē, C̄_{a+1}, …, C̄_k)`, which never loses
//!   hyperedges from the tracked classes and decreases `Ē` by exactly one per
//!   step;
//! - the *dominated* chain on `(E̲, C̲_{a+1}, …, C̲_k)`, which additionally
//!   drains `E̲` by a binomial leak.
//!
//! Throughout, `a = k - r + 1 = d - 1` is the largest live degree at which a
//! hyperedge can be peeled and `N(t) = n - ℓ - t` the number of live
//! vertices after `t` steps.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hypergraph::{EnsembleParams, Hypergraph};
use crate::math::{ln_choose, Proportion, RunningStats};
use crate::peeling::Peeler;
use crate::rng::{self, Rng64};
use crate::sampling::{binomial, multinomial};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n: u64,
    pub k: usize,
    pub r: usize,
    pub m: u64,
    pub ell: u64,
    pub seed: u64,
}

impl ChainParams {
    pub fn validate(&self) -> Result<()> {
        if self.r < 2 || self.r > self.k {
            return Err(Error::param(format!(
                "need 2 <= r <= k, got r = {}, k = {}",
                self.r, self.k
            )));
        }
        if self.k as u64 > self.n {
            return Err(Error::param("need k <= n"));
        }
        if self.ell >= self.n {
            return Err(Error::param(format!(
                "need ell < n, got ell = {}, n = {}",
                self.ell, self.n
            )));
        }
        Ok(())
    }

    /// `a = k - r + 1`.
    pub fn a(&self) -> usize {
        self.k - self.r + 1
    }

    /// Peeling parameter `d = k - r + 2`.
    pub fn d(&self) -> usize {
        self.k - self.r + 2
    }

    /// Live vertices after `t` steps.
    pub fn live(&self, t: u64) -> u64 {
        (self.n - self.ell).saturating_sub(t)
    }

    fn live_checked(&self, t: u64) -> Result<f64> {
        let live = self.live(t);
        if live <= self.k as u64 {
            return Err(Error::Horizon { live, k: self.k });
        }
        Ok(live as f64)
    }

    /// Steps that can be run before the horizon: `T < n - ℓ - k`.
    pub fn max_steps(&self) -> u64 {
        (self.n - self.ell).saturating_sub(self.k as u64 + 1)
    }

    pub fn ensemble(&self, seed: u64) -> EnsembleParams {
        EnsembleParams {
            n: self.n as usize,
            k: self.k,
            m: self.m as usize,
            ell: self.ell as usize,
            seed,
        }
    }
}

/// `p_j = C(n-ℓ, j)·C(ℓ, k-j) / C(n, k)`: probability that a uniform
/// k-subset keeps exactly `j` vertices outside the `ℓ` removed ones.
pub fn p_init(n: u64, k: usize, ell: u64, j: usize) -> f64 {
    if j > k {
        return 0.0;
    }
    let ln = ln_choose(n - ell, j as u64) + ln_choose(ell, (k - j) as u64) - ln_choose(n, k as u64);
    if ln == f64::NEG_INFINITY {
        0.0
    } else {
        ln.exp()
    }
}

pub fn p_init_all(n: u64, k: usize, ell: u64) -> Vec<f64> {
    (0..=k).map(|j| p_init(n, k, ell, j)).collect()
}

/// Initial census `Multinom(m, p_0, …, p_k)`.
pub fn sample_initial_census<R: Rng + ?Sized>(params: &ChainParams, rng: &mut R) -> Vec<u64> {
    multinomial(rng, params.m, &p_init_all(params.n, params.k, params.ell))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    Exact,
    Dominating,
    Dominated,
}

impl ChainKind {
    pub fn name(self) -> &'static str {
        match self {
            ChainKind::Exact => "exact",
            ChainKind::Dominating => "dominating",
            ChainKind::Dominated => "dominated",
        }
    }
}

/// Census snapshot common to all chains; untracked classes are `None`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSnapshot {
    pub t: u64,
    pub census: Vec<Option<u64>>,
    pub e_low: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactState {
    pub t: u64,
    pub counts: Vec<u64>,
    pub frozen: bool,
}

impl ExactState {
    pub fn from_census(params: &ChainParams, counts: Vec<u64>) -> Self {
        let frozen = counts[1..=params.a()].iter().all(|&c| c == 0);
        ExactState { t: 0, counts, frozen }
    }

    pub fn init<R: Rng + ?Sized>(params: &ChainParams, rng: &mut R) -> Self {
        Self::from_census(params, sample_initial_census(params, rng))
    }

    fn active(&self, a: usize) -> u64 {
        self.counts[1..=a].iter().sum()
    }
}

/// One vertex-removal step of the exact chain.
///
/// A chosen hyperedge of degree `j <= a` is drawn with probability
/// `C_j / Σ_{i<=a} C_i` and loses its vertex for sure; every other hyperedge
/// of degree `j` loses one with probability `j / N(t)`. A state with no
/// active hyperedge is frozen and left unchanged.
pub fn step_exact<R: Rng + ?Sized>(s: &mut ExactState, params: &ChainParams, rng: &mut R) -> Result<()> {
    let a = params.a();
    let k = params.k;
    let active = s.active(a);
    if active == 0 {
        s.frozen = true;
        return Ok(());
    }
    let live = params.live_checked(s.t)?;
    let mut pick = rng.random_range(0..active);
    let mut chosen = 0;
    for j in 1..=a {
        if pick < s.counts[j] {
            chosen = j;
            break;
        }
        pick -= s.counts[j];
    }
    // leaks[j] = R_j for j = 1..=k
    let mut leaks = [0u64; 64];
    for j in 1..=k {
        let forced = u64::from(j == chosen);
        leaks[j] = forced + binomial(rng, s.counts[j] - forced, j as f64 / live);
    }
    s.counts[0] += leaks[1];
    for j in 1..k {
        s.counts[j] = s.counts[j] - leaks[j] + leaks[j + 1];
    }
    s.counts[k] -= leaks[k];
    s.t += 1;
    s.frozen = s.active(a) == 0;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominatingState {
    pub t: u64,
    /// May become negative: the chain subtracts one per step unconditionally.
    pub e_bar: i64,
    /// `C̄_j` for `j = a+1..=k`.
    pub c_bar: Vec<u64>,
}

impl DominatingState {
    pub fn from_census(params: &ChainParams, census: &[u64]) -> Self {
        let a = params.a();
        DominatingState {
            t: 0,
            e_bar: weighted_low(census, a),
            c_bar: census[a + 1..].to_vec(),
        }
    }

    pub fn snapshot(&self, k: usize) -> ChainSnapshot {
        reduced_snapshot(self.t, self.e_bar, &self.c_bar, k)
    }
}


/// One step of the dominating chain: `C̄_k` is constant, `C̄_j` only gains
/// `R̄_{j+1}`, and `Ē` changes by `-1 + a·R̄_{a+1}` with
/// `R̄_j ~ Binom(C̄_j, j/N(t))`.
pub fn step_dominating<R: Rng + ?Sized>(
    s: &mut DominatingState,
    params: &ChainParams,
    rng: &mut R,
) -> Result<()> {
    let live = params.live_checked(s.t)?;
    let a = params.a();
    let leaks: Vec<u64> = s
        .c_bar
        .iter()
        .enumerate()
        .map(|(i, &c)| binomial(rng, c, (a + 1 + i) as f64 / live))
        .collect();
    let last = s.c_bar.len() - 1;
    for i in 0..last {
        s.c_bar[i] += leaks[i + 1];
    }
    s.e_bar += -1 + a as i64 * leaks[0] as i64;
    s.t += 1;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominatedState {
    pub t: u64,
    pub e_under: i64,
    /// `C̲_j` for `j = a+1..=k`.
    pub c_under: Vec<u64>,
}

impl DominatedState {
    pub fn from_census(params: &ChainParams, census: &[u64]) -> Self {
        let a = params.a();
        DominatedState {
            t: 0,
            e_under: weighted_low(census, a),
            c_under: census[a + 1..].to_vec(),
        }
    }

    pub fn snapshot(&self, k: usize) -> ChainSnapshot {
        reduced_snapshot(self.t, self.e_under, &self.c_under, k)
    }
}


/// One step of the dominated chain: tracked classes flow as in the exact
/// chain, and `E̲` changes by `-1 - R̲_low + a·R̲_{a+1}` with
/// `R̲_low ~ Binom(E̲ + t, 1/(N(t) - k + r))`.
pub fn step_dominated<R: Rng + ?Sized>(
    s: &mut DominatedState,
    params: &ChainParams,
    rng: &mut R,
) -> Result<()> {
    let live = params.live_checked(s.t)?;
    let pool = s.e_under + s.t as i64;
    if pool < 0 {
        return Err(Error::State(format!(
            "E + t = {pool} is negative at t = {}",
            s.t
        )));
    }
    let a = params.a();
    let leaks: Vec<u64> = s
        .c_under
        .iter()
        .enumerate()
        .map(|(i, &c)| binomial(rng, c, (a + 1 + i) as f64 / live))
        .collect();
    let drain = binomial(rng, pool as u64, 1.0 / (live - (params.k - params.r) as f64));
    let last = s.c_under.len() - 1;
    for i in 0..last {
        s.c_under[i] = s.c_under[i] - leaks[i] + leaks[i + 1];
    }
    s.c_under[last] -= leaks[last];
    s.e_under += -1 - drain as i64 + a as i64 * leaks[0] as i64;
    s.t += 1;
    Ok(())
}

fn weighted_low(census: &[u64], a: usize) -> i64 {
    census
        .iter()
        .enumerate()
        .take(a + 1)
        .map(|(j, &c)| (j as u64 * c) as i64)
        .sum()
}

fn reduced_snapshot(t: u64, e_low: i64, tracked: &[u64], k: usize) -> ChainSnapshot {
    let a = k - tracked.len();
    let mut census = vec![None; a + 1];
    census.extend(tracked.iter().map(|&c| Some(c)));
    ChainSnapshot { t, census, e_low }
}

fn exact_snapshot(s: &ExactState, a: usize) -> ChainSnapshot {
    ChainSnapshot {
        t: s.t,
        census: s.counts.iter().map(|&c| Some(c)).collect(),
        e_low: weighted_low(&s.counts, a),
    }
}

/// Result of [`run_chain`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRun {
    pub kind: ChainKind,
    /// `E(s) >= 1` for every `s < T`.
    pub survived: bool,
    /// First `s` with `E(s) < 1`, if any before `T`.
    pub died_at: Option<u64>,
    pub final_state: ChainSnapshot,
    pub trace: Option<Vec<ChainSnapshot>>,
}

/// Runs `steps` steps of the chosen chain from a freshly sampled initial
/// census, drawing everything from `params.seed`.
pub fn run_chain(kind: ChainKind, params: &ChainParams, steps: u64, record: bool) -> Result<ChainRun> {
    let mut rng = rng::from_seed(params.seed);
    run_chain_with(kind, params, steps, record, &mut rng)
}

pub fn run_chain_with(
    kind: ChainKind,
    params: &ChainParams,
    steps: u64,
    record: bool,
    rng: &mut Rng64,
) -> Result<ChainRun> {
    params.validate()?;
    if steps > params.max_steps() {
        return Err(Error::Horizon {
            live: params.live(steps),
            k: params.k,
        });
    }
    let census = sample_initial_census(params, rng);
    let a = params.a();
    let k = params.k;
    match kind {
        ChainKind::Exact => {
            let mut s = ExactState::from_census(params, census);
            drive(kind, steps, record, rng, |rng| {
                if let Some(rng) = rng {
                    if s.frozen {
                        return Ok(None);
                    }
                    step_exact(&mut s, params, rng)?;
                }
                Ok(Some(exact_snapshot(&s, a)))
            })
        }
        ChainKind::Dominating => {
            let mut s = DominatingState::from_census(params, &census);
            drive(kind, steps, record, rng, |rng| {
                if let Some(rng) = rng {
                    step_dominating(&mut s, params, rng)?;
                }
                Ok(Some(s.snapshot(k)))
            })
        }
        ChainKind::Dominated => {
            let mut s = DominatedState::from_census(params, &census);
            drive(kind, steps, record, rng, |rng| {
                if let Some(rng) = rng {
                    step_dominated(&mut s, params, rng)?;
                }
                Ok(Some(s.snapshot(k)))
            })
        }
    }
}

/// `advance(None)` reports the current state; `advance(Some(rng))` steps
/// first. `Ok(None)` means the chain is frozen and will not change again.
fn drive(
    kind: ChainKind,
    steps: u64,
    record: bool,
    rng: &mut Rng64,
    mut advance: impl FnMut(Option<&mut Rng64>) -> Result<Option<ChainSnapshot>>,
) -> Result<ChainRun> {
    let mut current = advance(None)?.expect("initial state");
    let mut trace = record.then(Vec::new);
    let mut died_at = None;
    for s in 0..steps {
        if died_at.is_none() && current.e_low < 1 {
            died_at = Some(s);
        }
        if let Some(tr) = trace.as_mut() {
            tr.push(current.clone());
        }
        match advance(Some(rng))? {
            Some(next) => current = next,
            None => break,
        }
    }
    if let Some(tr) = trace.as_mut() {
        if tr.last() != Some(&current) {
            tr.push(current.clone());
        }
    }
    Ok(ChainRun {
        kind,
        survived: died_at.is_none(),
        died_at,
        final_state: current,
        trace,
    })
}

/// Chain traces use the peel-trace columns plus a leading `kind` column.
/// Reduced chains leave untracked `C_j` blank.
pub fn write_chain_trace_csv<W: Write>(kind: ChainKind, k: usize, trace: &[ChainSnapshot], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["kind".to_string(), "t".into(), "chosen_edge".into(), "n_removed_this_step".into()];
    header.extend((0..=k).map(|j| format!("C_{j}")));
    header.push("E_low".into());
    out.write_record(&header)?;
    for s in trace {
        let mut rec = vec![
            kind.name().to_string(),
            s.t.to_string(),
            String::new(),
            if s.t == 0 { "0" } else { "1" }.to_string(),
        ];
        rec.extend(s.census.iter().map(|c| c.map(|c| c.to_string()).unwrap_or_default()));
        rec.push(s.e_low.to_string());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Per-trial seed for chain Monte Carlo: trial `i` of a batch keyed by
/// `seed` and a `tag` distinguishing chain kinds or phases.
fn trial_rng(seed: u64, tag: u64, i: u64) -> Rng64 {
    rng::stream(seed, &[tag, i])
}

/// Survival frequency of `kind` over `trials` independent runs of `steps`
/// steps.
pub fn survival_frequency(kind: ChainKind, params: &ChainParams, steps: u64, trials: u64) -> Result<Proportion> {
    let tag = kind as u64 + 10;
    let survived = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(params.seed, tag, i);
            run_chain_with(kind, params, steps, false, &mut rng).map(|r| u64::from(r.survived))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Proportion::new(survived.iter().sum(), trials))
}

/// Survival frequencies of the dominated, exact and dominating chains.
pub fn domination_survival(params: &ChainParams, steps: u64, trials: u64) -> Result<[Proportion; 3]> {
    Ok([
        survival_frequency(ChainKind::Dominated, params, steps, trials)?,
        survival_frequency(ChainKind::Exact, params, steps, trials)?,
        survival_frequency(ChainKind::Dominating, params, steps, trials)?,
    ])
}

/// Samples of `Ē(t)` from independent dominating-chain runs.
pub fn dominating_e_samples(params: &ChainParams, t: u64, trials: u64) -> Result<Vec<i64>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(params.seed, 20, i);
            run_chain_with(ChainKind::Dominating, params, t, false, &mut rng).map(|r| r.final_state.e_low)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgfEstimate {
    pub lambda: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Monte Carlo estimate of `E[exp(λ·Ē(t))]` for each `λ`, from the same set
/// of dominating-chain runs.
pub fn dominating_mgf_mc(params: &ChainParams, t: u64, lambdas: &[f64], trials: u64) -> Result<Vec<MgfEstimate>> {
    let samples = dominating_e_samples(params, t, trials)?;
    Ok(lambdas
        .iter()
        .map(|&lambda| {
            let stats: RunningStats = samples.iter().map(|&e| (lambda * e as f64).exp()).collect();
            MgfEstimate {
                lambda,
                mean: stats.mean(),
                stderr: stats.stderr(),
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateDivergence {
    pub coordinate: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub stderr: f64,
    pub z: f64,
}

impl CoordinateDivergence {
    fn from_stats(coordinate: String, a: &RunningStats, b: &RunningStats) -> Self {
        let stderr = (a.stderr().powi(2) + b.stderr().powi(2)).sqrt();
        let diff = a.mean() - b.mean();
        let z = if stderr > 0.0 {
            diff / stderr
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        CoordinateDivergence {
            coordinate,
            mean_a: a.mean(),
            mean_b: b.mean(),
            stderr,
            z,
        }
    }
}

/// Comparison of graph peeling (`a`) against the exact chain (`b`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub trials: u64,
    pub steps: u64,
    pub coordinates: Vec<CoordinateDivergence>,
}

impl DivergenceReport {
    pub fn max_abs_z(&self) -> f64 {
        self.coordinates.iter().map(|c| c.z.abs()).fold(0.0, f64::max)
    }
}

/// Runs one-vertex-per-step peeling on sampled graphs and the exact chain
/// with matched parameters for `steps` steps, and compares per-coordinate
/// means of `C_0..C_k`, `E_low` and the survival indicator at the end.
pub fn graph_vs_chain_census(params: &ChainParams, steps: u64, trials: u64) -> Result<DivergenceReport> {
    params.validate()?;
    if trials == 0 {
        return Ok(DivergenceReport {
            trials: 0,
            steps,
            coordinates: Vec::new(),
        });
    }
    if steps > params.max_steps() {
        return Err(Error::Horizon {
            live: params.live(steps),
            k: params.k,
        });
    }
    let k = params.k;
    let a = params.a();
    // Observation vector: C_0..C_k, E_low, survived.
    let graph_obs = (0..trials)
        .into_par_iter()
        .map(|i| {
            let g = Hypergraph::generate(&params.ensemble(rng::derive_seed(params.seed, &[30, i])))?;
            let mut peeler = Peeler::new(g, params.d())?;
            let mut rng = trial_rng(params.seed, 31, i);
            while peeler.steps() < steps as usize && peeler.step_one_vertex(&mut rng).is_some() {}
            let mut obs: Vec<f64> = peeler.census().iter().map(|&c| c as f64).collect();
            obs.push(peeler.e_low() as f64);
            obs.push(f64::from(u8::from(peeler.steps() == steps as usize)));
            Ok(obs)
        })
        .collect::<Result<Vec<_>>>()?;
    let chain_obs = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(params.seed, 32, i);
            let run = run_chain_with(ChainKind::Exact, params, steps, false, &mut rng)?;
            let mut obs: Vec<f64> = run.final_state.census.iter().map(|c| c.unwrap() as f64).collect();
            obs.push(run.final_state.e_low as f64);
            obs.push(f64::from(u8::from(run.survived)));
            Ok(obs)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut names: Vec<String> = (0..=k).map(|j| format!("C_{j}")).collect();
    names.push(format!("E_1^{a}"));
    names.push("survived".into());
    let coordinates = names
        .into_iter()
        .enumerate()
        .map(|(c, name)| {
            let sa: RunningStats = graph_obs.iter().map(|o| o[c]).collect();
            let sb: RunningStats = chain_obs.iter().map(|o| o[c]).collect();
            CoordinateDivergence::from_stats(name, &sa, &sb)
        })
        .collect();
    Ok(DivergenceReport {
        trials,
        steps,
        coordinates,
    })
}
