//! Seeded Monte Carlo experiments: trial tables, μ-sweeps, survival against
//! the subcritical bound, and the `r = 2` giant component.
//!
//! Every trial owns its graph and RNG stream. Seeds are derived from the
//! master seed and the trial's position in the experiment grid, and results
//! are collected by index, so output does not depend on the worker count.

mod io;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, TauStar};
use crate::chains::{self, ChainKind, ChainParams};
use crate::hypergraph::{EnsembleParams, Hypergraph};
use crate::math::{Proportion, RunningStats, Z99};
use crate::peeling::{peel_owned, PeelConfig, PeelTrace, Peeler};
use crate::rng;
use crate::{Error, Result};

pub use io::{read_rows, read_table, unix_now, write_rows, write_table, RunManifest, TableFormat, TableRow};

/// Default cap on `k·m` per graph.
pub const DEFAULT_MAX_INCIDENCES: u64 = 200_000_000;

/// How `ℓ` scales with `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EllRule {
    /// `⌈√n⌉`.
    SqrtN,
    /// `⌈n^β⌉`.
    Power(f64),
    Fixed(u64),
}

impl EllRule {
    pub fn ell(&self, n: u64) -> u64 {
        match *self {
            EllRule::SqrtN => {
                let s = n.isqrt();
                if s * s == n {
                    s
                } else {
                    s + 1
                }
            }
            EllRule::Power(beta) => snap((n as f64).powf(beta)).ceil() as u64,
            EllRule::Fixed(c) => c,
        }
    }
}

impl fmt::Display for EllRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EllRule::SqrtN => write!(f, "sqrt_n"),
            EllRule::Power(b) => write!(f, "power:{b}"),
            EllRule::Fixed(c) => write!(f, "fixed:{c}"),
        }
    }
}

impl FromStr for EllRule {
    type Err = Error;

    /// `sqrt_n`, `power:<beta>` or `fixed:<count>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param(format!("unknown ell rule {s:?}; use sqrt_n, power:<beta> or fixed:<count>"));
        match s.split_once(':') {
            None if s == "sqrt_n" => Ok(EllRule::SqrtN),
            Some(("power", b)) => {
                let beta: f64 = b.parse().map_err(|_| bad())?;
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(Error::param(format!("power exponent must lie in (0, 1), got {beta}")));
                }
                Ok(EllRule::Power(beta))
            }
            Some(("fixed", c)) => Ok(EllRule::Fixed(c.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for EllRule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EllRule> for String {
    fn from(r: EllRule) -> String {
        r.to_string()
    }
}

/// Rounds values within floating-point noise of an integer, e.g.
/// `0.7 * 10 = 7.000000000000001`.
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// `m = ⌊μ n^{r-1} / ℓ^{r-2}⌋`.
pub fn edge_count(mu: f64, n: u64, ell: u64, r: usize) -> u64 {
    let x = mu * (n as f64).powi(r as i32 - 1) / (ell as f64).powi(r as i32 - 2);
    snap(x).floor() as u64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivalSource {
    /// One-vertex-per-step peeling on sampled graphs.
    #[default]
    Graph,
    /// The exact census chain, which has the same law.
    Chain,
}

fn default_near_full() -> f64 {
    0.9
}
fn default_near_zero() -> f64 {
    3.0
}
fn default_max_incidences() -> u64 {
    DEFAULT_MAX_INCIDENCES
}
fn default_bootstrap() -> usize {
    1000
}

/// One experiment, read from a flat TOML document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub k: usize,
    pub r: usize,
    pub n_list: Vec<u64>,
    #[serde(default = "default_ell_rule")]
    pub ell_rule: EllRule,
    pub mu_list: Vec<f64>,
    pub trials: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub record_traces: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: TableFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_max_incidences")]
    pub max_incidences: u64,
    /// `near_full` when at least this fraction of live vertices is removed.
    #[serde(default = "default_near_full")]
    pub near_full_fraction: f64,
    /// `near_zero` when at most this multiple of `ℓ` is removed.
    #[serde(default = "default_near_zero")]
    pub near_zero_multiple: f64,
    #[serde(default = "default_bootstrap")]
    pub bootstrap_resamples: usize,
    #[serde(default)]
    pub survival_source: SurvivalSource,
}

fn default_ell_rule() -> EllRule {
    EllRule::SqrtN
}

impl ExperimentConfig {
    /// Config with defaults for everything but the grid.
    pub fn new(k: usize, r: usize, n_list: Vec<u64>, mu_list: Vec<f64>, trials: u64) -> Self {
        ExperimentConfig {
            k,
            r,
            n_list,
            ell_rule: EllRule::SqrtN,
            mu_list,
            trials,
            master_seed: 0,
            record_traces: false,
            output_path: None,
            format: TableFormat::Csv,
            workers: None,
            max_incidences: DEFAULT_MAX_INCIDENCES,
            near_full_fraction: default_near_full(),
            near_zero_multiple: default_near_zero(),
            bootstrap_resamples: default_bootstrap(),
            survival_source: SurvivalSource::Graph,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn d(&self) -> usize {
        self.k - self.r + 2
    }

    /// Hard errors for invalid grids; the returned strings are warnings for
    /// `ℓ(n)` outside `(1, n/4)`.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.r < 2 || self.r > self.k {
            return Err(Error::param(format!("need 2 <= r <= k, got k = {}, r = {}", self.k, self.r)));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.n_list.is_empty() || self.mu_list.is_empty() {
            return Err(Error::param("n_list and mu_list must be nonempty"));
        }
        if let Some(mu) = self.mu_list.iter().find(|mu| !(**mu >= 0.0 && mu.is_finite())) {
            return Err(Error::param(format!("mu values must be finite and nonnegative, got {mu}")));
        }
        if !(self.near_full_fraction > 0.0 && self.near_full_fraction <= 1.0) || !(self.near_zero_multiple >= 0.0) {
            return Err(Error::param("outcome cutoffs out of range"));
        }
        if self.workers == Some(0) {
            return Err(Error::param("workers must be at least 1"));
        }
        let mut warnings = Vec::new();
        for &n in &self.n_list {
            let ell = self.ell_rule.ell(n);
            if n < self.k as u64 || ell >= n {
                return Err(Error::param(format!("n = {n} is too small for k = {} and ell = {ell}", self.k)));
            }
            if !(ell > 1 && 4 * ell < n) {
                warnings.push(format!("ell({n}) = {ell} is outside (1, n/4)"));
            }
        }
        Ok(warnings)
    }

    fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for (ni, &n) in self.n_list.iter().enumerate() {
            let ell = self.ell_rule.ell(n);
            for (mi, &mu) in self.mu_list.iter().enumerate() {
                cells.push(Cell {
                    index: (ni * self.mu_list.len() + mi) as u64,
                    n,
                    ell,
                    mu,
                    m: edge_count(mu, n, ell, self.r),
                });
            }
        }
        cells
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            b = b.num_threads(w);
        }
        b.build().map_err(|e| Error::param(format!("worker pool: {e}")))
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    index: u64,
    n: u64,
    ell: u64,
    mu: f64,
    m: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    NearZero,
    Partial,
    NearFull,
}

/// `near_full` if `removed >= near_full·(n-ℓ)`, `near_zero` if
/// `removed <= near_zero·ℓ`, otherwise `partial`.
pub fn classify_outcome(removed: u64, n: u64, ell: u64, near_full: f64, near_zero: f64) -> Outcome {
    if removed as f64 >= near_full * (n - ell) as f64 {
        Outcome::NearFull
    } else if removed as f64 <= near_zero * ell as f64 {
        Outcome::NearZero
    } else {
        Outcome::Partial
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub k: usize,
    pub r: usize,
    pub n: u64,
    pub ell: u64,
    pub mu: f64,
    pub m: u64,
    pub seed: u64,
    pub removed_count: u64,
    pub removed_fraction: f64,
    /// Last one-vertex step `s` with `E(s) >= 1`; empty if peeling never
    /// starts. Equals `removed_count - 1` since each step removes one vertex.
    pub survived_to: Option<u64>,
    pub outcome: Outcome,
}

impl TableRow for TrialRow {
    const COLUMNS: &'static [&'static str] = &[
        "k",
        "r",
        "n",
        "ell",
        "mu",
        "m",
        "seed",
        "removed_count",
        "removed_fraction",
        "survived_to",
        "outcome",
    ];
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrialTable {
    pub rows: Vec<TrialRow>,
    /// One-vertex-per-step traces when `record_traces` is set, in row order.
    pub traces: Vec<PeelTrace>,
    pub warnings: Vec<String>,
}

fn check_capacity(cfg: &ExperimentConfig, cells: &[Cell]) -> Result<()> {
    for c in cells {
        let incidences = c.m.saturating_mul(cfg.k as u64);
        if incidences > cfg.max_incidences {
            return Err(Error::Capacity(format!(
                "n = {}, mu = {} needs {incidences} incidences, above the cap of {}",
                c.n, c.mu, cfg.max_incidences
            )));
        }
    }
    Ok(())
}

fn run_one(cfg: &ExperimentConfig, cell: &Cell, seed: u64) -> Result<(TrialRow, Option<PeelTrace>)> {
    let g = Hypergraph::generate(&EnsembleParams {
        n: cell.n as usize,
        k: cfg.k,
        m: cell.m as usize,
        ell: cell.ell as usize,
        seed,
    })?;
    let peel_cfg = if cfg.record_traces {
        PeelConfig::one_vertex(cfg.d(), rng::derive_seed(seed, &[1])).with_trace()
    } else {
        PeelConfig::batch(cfg.d())
    };
    let res = peel_owned(g, &peel_cfg)?;
    let removed = res.peeled as u64;
    let row = TrialRow {
        k: cfg.k,
        r: cfg.r,
        n: cell.n,
        ell: cell.ell,
        mu: cell.mu,
        m: cell.m,
        seed,
        removed_count: removed,
        removed_fraction: removed as f64 / (cell.n - cell.ell) as f64,
        survived_to: removed.checked_sub(1),
        outcome: classify_outcome(removed, cell.n, cell.ell, cfg.near_full_fraction, cfg.near_zero_multiple),
    };
    Ok((row, res.trace))
}

/// Generates and peels `trials` graphs for every `(n, μ)` cell. Trial `t`
/// of cell `c` uses seed `derive_seed(master_seed, [c, t])`.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<TrialTable> {
    let warnings = cfg.validate()?;
    let cells = cfg.cells();
    check_capacity(cfg, &cells)?;
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let results = cfg.pool()?.install(|| {
        jobs.par_iter()
            .map(|&(c, t)| {
                let cell = &cells[c];
                run_one(cfg, cell, rng::derive_seed(cfg.master_seed, &[cell.index, t]))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut table = TrialTable {
        warnings,
        ..TrialTable::default()
    };
    for (row, trace) in results {
        table.rows.push(row);
        table.traces.extend(trace);
    }
    Ok(table)
}

/// Median with the midpoint convention for even counts.
pub fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Percentile bootstrap interval of `stat` at level `1 - alpha`.
pub fn bootstrap_ci<R: Rng + ?Sized>(
    xs: &[f64],
    resamples: usize,
    alpha: f64,
    rng: &mut R,
    stat: impl Fn(&mut [f64]) -> f64,
) -> (f64, f64) {
    if xs.is_empty() || resamples == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut buf = vec![0.0; xs.len()];
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.random_range(0..xs.len())];
            }
            stat(&mut buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let q = |p: f64| stats[((p * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    (q(alpha / 2.0), q(1.0 - alpha / 2.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub r: usize,
    pub n: u64,
    pub ell: u64,
    pub mu: f64,
    pub m: u64,
    pub mu_c: f64,
    pub trials: u64,
    pub near_full_fraction: f64,
    pub near_full_lo: f64,
    pub near_full_hi: f64,
    pub median_removed_fraction: f64,
    pub median_lo: f64,
    pub median_hi: f64,
    /// `μ` within 2% of `μ_c`, where finite-size effects dominate.
    pub near_critical: bool,
}

impl TableRow for SweepRow {
    const COLUMNS: &'static [&'static str] = &[
        "k",
        "r",
        "n",
        "ell",
        "mu",
        "m",
        "mu_c",
        "trials",
        "near_full_fraction",
        "near_full_lo",
        "near_full_hi",
        "median_removed_fraction",
        "median_lo",
        "median_hi",
        "near_critical",
    ];
}

/// Estimated `μ` at which the near-full frequency crosses 1/2 for one `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub n: u64,
    pub mu_hat: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub crossings: Vec<Crossing>,
    pub trials: TrialTable,
}

/// Pool-adjacent-violators fit of a nondecreasing sequence.
fn isotonic(ys: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a <= b {
                break;
            }
            blocks.pop();
            let last = blocks.last_mut().unwrap();
            *last = ((a * na as f64 + b * nb as f64) / (na + nb) as f64, na + nb);
        }
    }
    blocks.into_iter().flat_map(|(v, n)| std::iter::repeat_n(v, n)).collect()
}

/// Point where the monotone fit of `freq` against ascending `mus` crosses
/// `level`, by linear interpolation.
pub fn crossing_point(mus: &[f64], freq: &[f64], level: f64) -> Option<f64> {
    let fit = isotonic(freq);
    if fit.first().is_some_and(|&f| f >= level) {
        return None;
    }
    for i in 1..fit.len() {
        if fit[i] >= level {
            let (f0, f1) = (fit[i - 1], fit[i]);
            let (m0, m1) = (mus[i - 1], mus[i]);
            return Some(m0 + (level - f0) * (m1 - m0) / (f1 - f0));
        }
    }
    None
}

/// Runs the trials of `cfg` and summarizes each `(n, μ)` cell: near-full
/// frequency and median removed fraction with 95% bootstrap intervals, and
/// the 50% crossing per `n`.
pub fn sweep_transition(cfg: &ExperimentConfig) -> Result<Sweep> {
    let trials = run_trials(cfg)?;
    let mu_c = analysis::mu_critical(cfg.k, cfg.r)?;
    let mut rows = Vec::new();
    let per_cell = cfg.trials as usize;
    for (ci, cell) in cfg.cells().iter().enumerate() {
        let chunk = &trials.rows[ci * per_cell..(ci + 1) * per_cell];
        let full: Vec<f64> = chunk
            .iter()
            .map(|r| f64::from(u8::from(r.outcome == Outcome::NearFull)))
            .collect();
        let mut fracs: Vec<f64> = chunk.iter().map(|r| r.removed_fraction).collect();
        let mut brng = rng::stream(cfg.master_seed, &[cell.index, u64::MAX]);
        let mean = |xs: &mut [f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        let (flo, fhi) = bootstrap_ci(&full, cfg.bootstrap_resamples, 0.05, &mut brng, mean);
        let (mlo, mhi) = bootstrap_ci(&fracs, cfg.bootstrap_resamples, 0.05, &mut brng, median);
        rows.push(SweepRow {
            k: cfg.k,
            r: cfg.r,
            n: cell.n,
            ell: cell.ell,
            mu: cell.mu,
            m: cell.m,
            mu_c,
            trials: cfg.trials,
            near_full_fraction: mean(&mut full.clone()),
            near_full_lo: flo,
            near_full_hi: fhi,
            median_removed_fraction: median(&mut fracs),
            median_lo: mlo,
            median_hi: mhi,
            near_critical: (cell.mu / mu_c - 1.0).abs() < 0.02,
        });
    }
    let mut crossings = Vec::new();
    for &n in &cfg.n_list {
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| (r.mu, r.near_full_fraction))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mus, freq): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        crossings.push(Crossing {
            n,
            mu_hat: crossing_point(&mus, &freq, 0.5),
        });
    }
    Ok(Sweep { rows, crossings, trials })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivalRegime {
    /// `τ > τ*`: the subcritical bound applies.
    Bounded,
    /// `τ <= τ*`: no bound.
    BelowTauStar,
    /// `μ >= μ_c`: no bound.
    NotSubcritical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub k: usize,
    pub r: usize,
    pub n: u64,
    pub ell: u64,
    pub mu: f64,
    pub m: u64,
    pub tau: f64,
    pub steps: u64,
    pub trials: u64,
    pub survived: u64,
    pub empirical: f64,
    pub stderr: f64,
    pub regime: SurvivalRegime,
    pub rate: Option<f64>,
    pub bound: Option<f64>,
    /// `empirical <= bound + 3·stderr`, when a bound applies.
    pub consistent: Option<bool>,
}

impl TableRow for SurvivalRow {
    const COLUMNS: &'static [&'static str] = &[
        "k",
        "r",
        "n",
        "ell",
        "mu",
        "m",
        "tau",
        "steps",
        "trials",
        "survived",
        "empirical",
        "stderr",
        "regime",
        "rate",
        "bound",
        "consistent",
    ];
}

/// `exp(rate · ℓ)` with `rate = subcritical_rate(k, r, μ, τ)`.
pub fn survival_bound(k: usize, r: usize, mu: f64, tau: f64, ell: u64) -> Result<f64> {
    Ok((analysis::subcritical_rate(k, r, mu, tau)? * ell as f64).exp())
}

fn graph_survives(cfg: &ExperimentConfig, cell: &Cell, steps: u64, seed: u64) -> Result<bool> {
    let g = Hypergraph::generate(&EnsembleParams {
        n: cell.n as usize,
        k: cfg.k,
        m: cell.m as usize,
        ell: cell.ell as usize,
        seed,
    })?;
    let mut peeler = Peeler::new(g, cfg.d())?;
    let mut prng = rng::stream(seed, &[1]);
    while (peeler.steps() as u64) < steps {
        if peeler.step_one_vertex(&mut prng).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Empirical `Pr(E(s) >= 1 for all s < ⌊τℓ⌋)` per `(n, μ)` cell, against
/// `exp(subcritical_rate · ℓ)` where the bound applies.
pub fn survival_vs_bound(cfg: &ExperimentConfig, tau: f64) -> Result<Vec<SurvivalRow>> {
    cfg.validate()?;
    if !(tau > 0.0) {
        return Err(Error::param(format!("need tau > 0, got {tau}")));
    }
    let cells = cfg.cells();
    check_capacity(cfg, &cells)?;
    let pool = cfg.pool()?;
    let mut rows = Vec::new();
    for cell in &cells {
        let steps = (snap(tau * cell.ell as f64)).floor() as u64;
        let params = ChainParams {
            n: cell.n,
            k: cfg.k,
            r: cfg.r,
            m: cell.m,
            ell: cell.ell,
            seed: rng::derive_seed(cfg.master_seed, &[cell.index]),
        };
        if steps > params.max_steps() {
            return Err(Error::Horizon {
                live: params.live(steps),
                k: cfg.k,
            });
        }
        let survived = pool.install(|| match cfg.survival_source {
            SurvivalSource::Chain => {
                chains::survival_frequency(ChainKind::Exact, &params, steps, cfg.trials).map(|p| p.successes)
            }
            SurvivalSource::Graph => (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    graph_survives(cfg, cell, steps, rng::derive_seed(cfg.master_seed, &[cell.index, t]))
                        .map(u64::from)
                })
                .collect::<Result<Vec<_>>>()
                .map(|v| v.iter().sum()),
        })?;
        let p = Proportion::new(survived, cfg.trials);
        let empirical = p.estimate();
        let stderr = (empirical * (1.0 - empirical) / cfg.trials as f64).sqrt();
        let (regime, rate) = if cfg.r < 3 {
            (SurvivalRegime::NotSubcritical, None)
        } else {
            match analysis::tau_star(cfg.k, cfg.r, cell.mu)? {
                TauStar::Root(ts) if tau > ts => (
                    SurvivalRegime::Bounded,
                    Some(analysis::subcritical_rate(cfg.k, cfg.r, cell.mu, tau)?),
                ),
                TauStar::Root(_) => (SurvivalRegime::BelowTauStar, None),
                _ => (SurvivalRegime::NotSubcritical, None),
            }
        };
        let bound = rate.map(|r| (r * cell.ell as f64).exp());
        rows.push(SurvivalRow {
            k: cfg.k,
            r: cfg.r,
            n: cell.n,
            ell: cell.ell,
            mu: cell.mu,
            m: cell.m,
            tau,
            steps,
            trials: cfg.trials,
            survived,
            empirical,
            stderr,
            regime,
            rate,
            bound,
            consistent: bound.map(|b| empirical <= b + 3.0 * stderr),
        });
    }
    Ok(rows)
}

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
    }

    pub fn largest(&self) -> usize {
        (0..self.parent.len())
            .filter(|&x| self.parent[x] as usize == x)
            .map(|x| self.size[x] as usize)
            .max()
            .unwrap_or(0)
    }
}

/// Largest connected component of `h`, counting vertices, in which two
/// vertices are adjacent when they share a hyperedge.
pub fn largest_component(h: &Hypergraph) -> usize {
    let mut ds = DisjointSets::new(h.n());
    for e in h.edges() {
        for w in e.windows(2) {
            ds.union(w[0], w[1]);
        }
    }
    ds.largest()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GiantReport {
    pub k: usize,
    pub mu: f64,
    pub n: u64,
    pub m: u64,
    pub trials: u64,
    pub mean_fraction: f64,
    pub stderr: f64,
    pub ci99_lo: f64,
    pub ci99_hi: f64,
    pub rho: Option<f64>,
    /// `1 - ρ`, or 0 below the threshold.
    pub predicted_fraction: f64,
    pub fractions: Vec<f64>,
}

impl GiantReport {
    pub fn deviation(&self) -> f64 {
        (self.mean_fraction - self.predicted_fraction).abs()
    }
}

/// Mean largest-component fraction of `G_k(n, ⌊μn⌋, 0)` over `trials`
/// graphs, against `1 - ρ`.
pub fn giant_component_check(k: usize, mu: f64, n: u64, trials: u64, seed: u64) -> Result<GiantReport> {
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    if !(mu >= 0.0) {
        return Err(Error::param(format!("need mu >= 0, got {mu}")));
    }
    let m = snap(mu * n as f64).floor() as u64;
    let rho = analysis::giant_component_rho(k, mu)?;
    let fractions = (0..trials)
        .into_par_iter()
        .map(|t| {
            let g = Hypergraph::generate(&EnsembleParams {
                n: n as usize,
                k,
                m: m as usize,
                ell: 0,
                seed: rng::derive_seed(seed, &[t]),
            })?;
            Ok(largest_component(&g) as f64 / n as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let stats: RunningStats = fractions.iter().copied().collect();
    Ok(GiantReport {
        k,
        mu,
        n,
        m,
        trials,
        mean_fraction: stats.mean(),
        stderr: stats.stderr(),
        ci99_lo: stats.mean() - Z99 * stats.stderr(),
        ci99_hi: stats.mean() + Z99 * stats.stderr(),
        rho,
        predicted_fraction: rho.map_or(0.0, |r| 1.0 - r),
        fractions,
    })
}

/// Writes the tables of a finished sweep under `base` (`base.trials.csv`,
/// `base.summary.csv`, `base.crossings.json`, `base.manifest.json`) and
/// returns the paths written.
pub fn write_sweep(cfg: &ExperimentConfig, sweep: &Sweep, base: &Path, started: u64, wall: f64) -> Result<Vec<PathBuf>> {
    if let Some(dir) = base.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let with_suffix = |suffix: &str| {
        let mut s = base.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    let ext = cfg.format.extension();
    let trials_path = with_suffix(&format!(".trials.{ext}"));
    let summary_path = with_suffix(&format!(".summary.{ext}"));
    let crossings_path = with_suffix(".crossings.json");
    write_table(&sweep.trials.rows, &trials_path, cfg.format)?;
    write_table(&sweep.rows, &summary_path, cfg.format)?;
    std::fs::write(&crossings_path, serde_json::to_string_pretty(&sweep.crossings)? + "\n")?;
    let mut outputs = vec![trials_path, summary_path, crossings_path];
    for (i, trace) in sweep.trials.traces.iter().enumerate() {
        let p = with_suffix(&format!(".trace{i}.csv"));
        trace.write_csv(std::io::BufWriter::new(std::fs::File::create(&p)?))?;
        outputs.push(p);
    }
    let manifest_path = with_suffix(".manifest.json");
    RunManifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_seconds: started,
        wall_time_seconds: wall,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        warnings: sweep.trials.warnings.clone(),
    }
    .write(&manifest_path)?;
    outputs.push(manifest_path);
    Ok(outputs)
}
