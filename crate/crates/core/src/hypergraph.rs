//! Bipartite representation of k-uniform hypergraphs and the random ensemble
//! `G_k(n, m, ℓ)`.
//!
//! Vertices and hyperedges are dense integer ids starting at 0. The structure
//! keeps the edge list, its transpose (per-vertex incidence lists in CSR
//! form), the set of removed vertices and, for every hyperedge, the number of
//! incident vertices that are still live.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::{Error, Result};

/// Parameters of `G_k(n, m, ℓ)`: `m` i.i.d. uniform k-subsets of `n`
/// vertices, after which the `ell` lowest-indexed vertices are removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub ell: usize,
    pub seed: u64,
}

impl EnsembleParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || self.k > self.n {
            return Err(Error::param(format!(
                "need 2 <= k <= n, got k = {}, n = {}",
                self.k, self.n
            )));
        }
        if self.ell >= self.n {
            return Err(Error::param(format!(
                "need ell < n, got ell = {}, n = {}",
                self.ell, self.n
            )));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::param("vertex ids must fit in 32 bits"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    /// `m * k` vertex ids, each chunk of `k` sorted ascending.
    edges: Vec<u32>,
    /// CSR offsets into `incidence`, length `n + 1`.
    offsets: Vec<usize>,
    incidence: Vec<u32>,
    removed: Vec<bool>,
    removed_count: usize,
    live_degree: Vec<u32>,
}

impl Hypergraph {
    /// Samples `G_k(n, m, ℓ)`.
    ///
    /// Each hyperedge is drawn with Floyd's algorithm, which yields an exactly
    /// uniform k-subset without rejection; edges are independent, so
    /// duplicates are possible.
    pub fn generate(params: &EnsembleParams) -> Result<Self> {
        params.validate()?;
        let EnsembleParams { n, k, m, ell, seed } = *params;
        let mut rng = rng::from_seed(seed);
        let mut edges = Vec::with_capacity(m * k);
        let mut scratch = Vec::with_capacity(k);
        for _ in 0..m {
            sample_k_subset(&mut rng, n as u32, k, &mut scratch);
            edges.extend_from_slice(&scratch);
        }
        let mut h = Self::from_flat(n, k, edges);
        for v in 0..ell {
            h.remove_vertex(v as u32);
        }
        Ok(h)
    }

    /// Builds a hypergraph from explicit edges and an initial removal set.
    pub fn from_edge_list<E: AsRef<[u32]>>(
        n: usize,
        k: usize,
        edges: &[E],
        removed: &[u32],
    ) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::Format(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
        }
        let mut flat = Vec::with_capacity(edges.len() * k);
        let mut scratch = Vec::with_capacity(k);
        for (i, e) in edges.iter().enumerate() {
            let e = e.as_ref();
            if e.len() != k {
                return Err(Error::Format(format!(
                    "edge {i} has {} vertices, expected {k}",
                    e.len()
                )));
            }
            scratch.clear();
            scratch.extend_from_slice(e);
            scratch.sort_unstable();
            if let Some(&v) = scratch.iter().find(|&&v| v as usize >= n) {
                return Err(Error::Format(format!("edge {i} has vertex {v} >= n = {n}")));
            }
            if scratch.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Format(format!("edge {i} repeats a vertex")));
            }
            flat.extend_from_slice(&scratch);
        }
        let mut h = Self::from_flat(n, k, flat);
        for &v in removed {
            if v as usize >= n {
                return Err(Error::Format(format!("removed vertex {v} >= n = {n}")));
            }
            h.remove_vertex(v);
        }
        Ok(h)
    }

    fn from_flat(n: usize, k: usize, edges: Vec<u32>) -> Self {
        let m = edges.len() / k;
        let mut offsets = vec![0usize; n + 1];
        for &v in &edges {
            offsets[v as usize + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets.clone();
        let mut incidence = vec![0u32; edges.len()];
        for (e, chunk) in edges.chunks_exact(k).enumerate() {
            for &v in chunk {
                incidence[fill[v as usize]] = e as u32;
                fill[v as usize] += 1;
            }
        }
        Hypergraph {
            n,
            k,
            edges,
            offsets,
            incidence,
            removed: vec![false; n],
            removed_count: 0,
            live_degree: vec![k as u32; m],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of hyperedges.
    pub fn m(&self) -> usize {
        self.live_degree.len()
    }

    pub fn edge(&self, e: usize) -> &[u32] {
        &self.edges[e * self.k..(e + 1) * self.k]
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.edges.chunks_exact(self.k)
    }

    /// Hyperedges containing `v` (the neighbourhood of the vertex node).
    pub fn incident(&self, v: u32) -> &[u32] {
        &self.incidence[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn is_removed(&self, v: u32) -> bool {
        self.removed[v as usize]
    }

    pub fn removed_count(&self) -> usize {
        self.removed_count
    }

    pub fn live_count(&self) -> usize {
        self.n - self.removed_count
    }

    pub fn live_vertices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.n as u32).filter(move |&v| !self.removed[v as usize])
    }

    pub fn removed_vertices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.n as u32).filter(move |&v| self.removed[v as usize])
    }

    pub fn live_degree(&self, e: usize) -> u32 {
        self.live_degree[e]
    }

    pub fn live_degrees(&self) -> &[u32] {
        &self.live_degree
    }

    /// Removes `v` and returns `true`, or returns `false` if it was already
    /// removed.
    pub fn remove_vertex(&mut self, v: u32) -> bool {
        self.remove_vertex_with(v, |_, _| {})
    }

    /// Like [`remove_vertex`](Self::remove_vertex), calling
    /// `on_drop(edge, new_live_degree)` for every incident hyperedge.
    pub(crate) fn remove_vertex_with(&mut self, v: u32, mut on_drop: impl FnMut(u32, u32)) -> bool {
        let vi = v as usize;
        if self.removed[vi] {
            return false;
        }
        self.removed[vi] = true;
        self.removed_count += 1;
        for &e in &self.incidence[self.offsets[vi]..self.offsets[vi + 1]] {
            let d = &mut self.live_degree[e as usize];
            *d -= 1;
            on_drop(e, *d);
        }
        true
    }

    /// `[C_0, …, C_k]`: number of hyperedges by live degree.
    pub fn degree_census(&self) -> Vec<u64> {
        let mut census = vec![0u64; self.k + 1];
        for &d in &self.live_degree {
            census[d as usize] += 1;
        }
        census
    }

    /// Reads the text edge-list format:
    ///
    /// ```text
    /// n k m
    /// v v v        (m lines of k ids)
    /// removed: v v (optional)
    /// ```
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Format("empty edge list".into()))?;
        let header = parse_ids(&header?, 1)?;
        let [n, k, m] = header[..] else {
            return Err(Error::Format("header must be `n k m`".into()));
        };
        let (n, k, m) = (n as usize, k as usize, m as usize);
        let mut edges = Vec::with_capacity(m);
        let mut removed = Vec::new();
        for (lineno, line) in lines {
            let line = line?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("removed:") {
                removed = parse_ids(rest, lineno + 1)?;
                continue;
            }
            if !removed.is_empty() || edges.len() == m {
                return Err(Error::Format(format!("line {}: unexpected content", lineno + 1)));
            }
            edges.push(parse_ids(line, lineno + 1)?);
        }
        if edges.len() != m {
            return Err(Error::Format(format!(
                "header announces {m} edges, found {}",
                edges.len()
            )));
        }
        Self::from_edge_list(n, k, &edges, &removed)
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.n, self.k, self.m())?;
        let mut line = String::new();
        for e in self.edges() {
            line.clear();
            for (i, v) in e.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                write!(line, "{v}").unwrap();
            }
            writeln!(w, "{line}")?;
        }
        if self.removed_count > 0 {
            line.clear();
            line.push_str("removed:");
            for v in self.removed_vertices() {
                write!(line, " {v}").unwrap();
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

fn parse_ids(s: &str, lineno: usize) -> Result<Vec<u32>> {
    s.split_whitespace()
        .map(|tok| {
            tok.parse::<u32>()
                .map_err(|_| Error::Format(format!("line {lineno}: bad integer `{tok}`")))
        })
        .collect()
}

/// Floyd's algorithm: uniform `k`-subset of `0..n`, written sorted to `out`.
fn sample_k_subset<R: Rng + ?Sized>(rng: &mut R, n: u32, k: usize, out: &mut Vec<u32>) {
    out.clear();
    for j in (n - k as u32)..n {
        let t = rng.random_range(0..=j);
        if out.contains(&t) {
            out.push(j);
        } else {
            out.push(t);
        }
    }
    out.sort_unstable();
}

/// The 3-uniform hypergraph on 5 vertices and 7 hyperedges used as the
/// canonical small fixture (0-indexed).
pub fn figure_one() -> Hypergraph {
    const EDGES: [[u32; 3]; 7] = [
        [0, 2, 4],
        [0, 1, 3],
        [1, 2, 4],
        [0, 3, 4],
        [1, 2, 4],
        [0, 1, 2],
        [0, 3, 4],
    ];
    Hypergraph::from_edge_list(5, 3, &EDGES, &[]).expect("fixture is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::choose_exact;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn params(n: usize, k: usize, m: usize, ell: usize, seed: u64) -> EnsembleParams {
        EnsembleParams { n, k, m, ell, seed }
    }

    #[test]
    fn generate_without_removal() {
        let h = Hypergraph::generate(&params(5, 3, 7, 0, 11)).unwrap();
        assert_eq!(h.m(), 7);
        assert!(h.live_degrees().iter().all(|&d| d == 3));
        assert_eq!(h.degree_census(), vec![0, 0, 0, 7]);
    }

    #[test]
    fn generate_rejects_bad_params() {
        assert!(matches!(
            Hypergraph::generate(&params(5, 3, 7, 5, 0)),
            Err(Error::Parameter(_))
        ));
        assert!(Hypergraph::generate(&params(5, 1, 7, 0, 0)).is_err());
        assert!(Hypergraph::generate(&params(2, 3, 7, 0, 0)).is_err());
    }

    #[test]
    fn generate_removes_lowest_indices() {
        let h = Hypergraph::generate(&params(50, 4, 100, 7, 3)).unwrap();
        let removed: Vec<u32> = h.removed_vertices().collect();
        assert_eq!(removed, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn generation_is_reproducible() {
        let p = params(1000, 3, 5000, 30, 99);
        assert_eq!(Hypergraph::generate(&p).unwrap(), Hypergraph::generate(&p).unwrap());
        let q = EnsembleParams { seed: 100, ..p };
        assert_ne!(Hypergraph::generate(&p).unwrap(), Hypergraph::generate(&q).unwrap());
    }

    /// Each of the C(30,3) = 4060 subsets should appear with frequency
    /// 1/4060: Pearson statistic within 5 sd of its mean, and every single
    /// count within 5 binomial sd.
    #[test]
    fn edges_are_uniform_k_subsets() {
        let m = 100_000;
        let h = Hypergraph::generate(&params(30, 3, m, 0, 5)).unwrap();
        let cells = choose_exact(30, 3).unwrap() as usize;
        let mut counts: HashMap<&[u32], u64> = HashMap::new();
        for e in h.edges() {
            assert!(e.windows(2).all(|w| w[0] < w[1]));
            *counts.entry(e).or_default() += 1;
        }
        let p = 1.0 / cells as f64;
        let expected = m as f64 * p;
        let sd = (m as f64 * p * (1.0 - p)).sqrt();
        let mut chi2 = (cells - counts.len()) as f64 * expected;
        for &c in counts.values() {
            assert!((c as f64 - expected).abs() < 5.0 * sd, "count {c}");
            chi2 += (c as f64 - expected).powi(2) / expected;
        }
        let dof = (cells - 1) as f64;
        assert!((chi2 - dof).abs() < 5.0 * (2.0 * dof).sqrt(), "chi2 = {chi2}");
    }

    #[test]
    fn figure_one_fixture() {
        let h = figure_one();
        assert!(h.live_degrees().iter().all(|&d| d == 3));
        assert_eq!(h.degree_census(), vec![0, 0, 0, 7]);
        let mut h = h;
        h.remove_vertex(0);
        assert_eq!(h.live_degrees(), &[2, 2, 3, 2, 3, 2, 2]);
        assert_eq!(h.degree_census(), vec![0, 0, 5, 2]);
    }

    #[test]
    fn malformed_edges() {
        let short: [&[u32]; 1] = [&[0, 1]];
        assert!(matches!(Hypergraph::from_edge_list(5, 3, &short, &[]), Err(Error::Format(_))));
        let dup: [&[u32]; 1] = [&[0, 1, 1]];
        assert!(matches!(Hypergraph::from_edge_list(5, 3, &dup, &[]), Err(Error::Format(_))));
        let big: [&[u32]; 1] = [&[0, 1, 5]];
        assert!(matches!(Hypergraph::from_edge_list(5, 3, &big, &[]), Err(Error::Format(_))));
    }

    #[test]
    fn empty_hypergraph_census() {
        let none: [&[u32]; 0] = [];
        let h = Hypergraph::from_edge_list(4, 3, &none, &[]).unwrap();
        assert_eq!(h.degree_census(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn text_format_round_trip() {
        let mut h = figure_one();
        h.remove_vertex(0);
        h.remove_vertex(3);
        let mut buf = Vec::new();
        h.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("5 3 7\n0 2 4\n"));
        assert!(text.ends_with("removed: 0 3\n"));
        assert_eq!(Hypergraph::read_edge_list(&buf[..]).unwrap(), h);
    }

    #[test]
    fn text_format_errors() {
        assert!(Hypergraph::read_edge_list(&b""[..]).is_err());
        assert!(Hypergraph::read_edge_list(&b"5 3 2\n0 1 2\n"[..]).is_err());
        assert!(Hypergraph::read_edge_list(&b"5 3 1\n0 1 x\n"[..]).is_err());
        assert!(Hypergraph::read_edge_list(&b"5 3 1\n0 1 2\n3 4 0\n"[..]).is_err());
        let h = Hypergraph::read_edge_list(&b"5 3 1\n2 1 0\n\nremoved:\n"[..]).unwrap();
        assert_eq!(h.edge(0), &[0, 1, 2]);
        assert_eq!(h.removed_count(), 0);
    }

    proptest! {
        #[test]
        fn incidence_is_transpose(n in 3usize..40, m in 0usize..60, seed: u64) {
            let h = Hypergraph::generate(&params(n, 3, m, 0, seed)).unwrap();
            let mut total = 0;
            for v in 0..n as u32 {
                for &e in h.incident(v) {
                    prop_assert!(h.edge(e as usize).contains(&v));
                }
                total += h.incident(v).len();
            }
            prop_assert_eq!(total, m * 3);
        }

        #[test]
        fn census_shift_on_removal(n in 4usize..30, m in 0usize..50, seed: u64, v in 0u32..4) {
            let mut h = Hypergraph::generate(&params(n, 4, m, 0, seed)).unwrap();
            let before = h.degree_census();
            h.remove_vertex(v);
            let after = h.degree_census();
            let mut expected = before.clone();
            for &e in h.incident(v) {
                let d = h.live_degree(e as usize) as usize;
                expected[d + 1] -= 1;
                expected[d] += 1;
            }
            prop_assert_eq!(after, expected);
        }

        #[test]
        fn weighted_census_counts_live_incidences(n in 4usize..30, m in 0usize..50, ell in 0usize..4, seed: u64) {
            let h = Hypergraph::generate(&params(n, 3, m, ell, seed)).unwrap();
            let census = h.degree_census();
            prop_assert_eq!(census.iter().sum::<u64>(), m as u64);
            let weighted: u64 = census.iter().enumerate().map(|(j, &c)| j as u64 * c).sum();
            let live_pairs: usize = h.live_vertices().map(|v| h.incident(v).len()).sum();
            prop_assert_eq!(weighted, live_pairs as u64);
        }
    }
}
