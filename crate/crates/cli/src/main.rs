use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hyperpeel::analysis::{self, MgfQuery, RateReport};
use hyperpeel::chains::{self, ChainKind, ChainParams};
use hyperpeel::harness::{self, EllRule, ExperimentConfig, TableFormat};
use hyperpeel::hypergraph::{EnsembleParams, Hypergraph};
use hyperpeel::peeling::{peel_owned, PeelConfig, Schedule};

/// Peeling on random k-uniform hypergraphs.
#[derive(Parser)]
#[command(name = "hyperpeel", version, about)]
struct Cli {
    /// Worker threads for Monte Carlo subcommands.
    #[arg(long, global = true, env = "HYPERPEEL_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a hypergraph from G_k(n, m, ell) and write it as an edge list.
    Generate(GenerateArgs),
    /// Peel an edge-list file and print the removed count and remainder.
    Peel(PeelArgs),
    /// Simulate one of the census chains.
    Chain(ChainArgs),
    /// Exact MGF of the dominating chain, with an optional Monte Carlo check.
    Mgf(MgfArgs),
    /// Threshold constant, tau* and rate exponents.
    Threshold(ThresholdArgs),
    /// Run a mu-sweep from a config file.
    Sweep(SweepArgs),
    /// Survival frequency against the subcritical bound, from a config file.
    Survival(SurvivalArgs),
    /// Largest component of G_k(n, mu*n, 0) against 1 - rho.
    Giant(GiantArgs),
    /// Stopping-set counts and r = 2 formulas.
    #[command(subcommand)]
    Appendix(AppendixCommand),
}

/// Ensemble size flags shared by several subcommands.
#[derive(Args)]
struct SizeArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: usize,
    /// Number of hyperedges; overrides --mu.
    #[arg(long)]
    m: Option<u64>,
    /// Density: m = floor(mu * n^(r-1) / ell^(r-2)).
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 3)]
    r: usize,
    /// Initially removed vertices; defaults to ceil(sqrt(n)).
    #[arg(long)]
    ell: Option<u64>,
}

impl SizeArgs {
    fn ell(&self) -> u64 {
        self.ell.unwrap_or_else(|| EllRule::SqrtN.ell(self.n))
    }

    fn m(&self) -> Result<u64> {
        match (self.m, self.mu) {
            (Some(m), _) => Ok(m),
            (None, Some(mu)) => Ok(harness::edge_count(mu, self.n, self.ell(), self.r)),
            (None, None) => bail!("one of --m or --mu is required"),
        }
    }

    fn chain_params(&self, seed: u64) -> Result<ChainParams> {
        Ok(ChainParams {
            n: self.n,
            k: self.k,
            r: self.r,
            m: self.m()?,
            ell: self.ell(),
            seed,
        })
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Batch,
    OneVertex,
}

#[derive(Args)]
struct PeelArgs {
    /// Edge-list file: header `n k m`, m lines of vertices, optional `removed:` line.
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    d: usize,
    /// Vertices to remove before peeling, in addition to the file's.
    #[arg(long, value_delimiter = ',')]
    remove: Vec<u32>,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Batch)]
    schedule: ScheduleArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-step trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Exact,
    Dominating,
    Dominated,
}

impl From<KindArg> for ChainKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Exact => ChainKind::Exact,
            KindArg::Dominating => ChainKind::Dominating,
            KindArg::Dominated => ChainKind::Dominated,
        }
    }
}

#[derive(Args)]
struct ChainArgs {
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long, value_enum, default_value_t = KindArg::Exact)]
    kind: KindArg,
    /// Number of steps T; survival means E(s) >= 1 for all s < T.
    #[arg(long)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the state trajectory as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Repeat the run this many times and report the survival frequency.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args)]
struct MgfArgs {
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long)]
    t: u64,
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    /// Monte Carlo runs of the dominating chain for a cross-check.
    #[arg(long)]
    mc: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    mu: Option<f64>,
    /// Horizon fraction for the subcritical exponent.
    #[arg(long)]
    tau: Option<f64>,
    /// Print the rate report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Base path for output tables; overrides the config's output_path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SurvivalArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    tau: f64,
}

#[derive(Args)]
struct GiantArgs {
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum AppendixCommand {
    /// ln E[S(l)] for d-stopping sets of size l in G_k(n, m, 0).
    StoppingSets {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        d: usize,
        /// Set size; all sizes 0..=n when absent.
        #[arg(long)]
        l: Option<u64>,
    },
    /// h(delta) + gamma ln(1 - k delta (1-delta)^(k-1)).
    LinearRate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Smallest gamma with linear rate <= -1 on [alpha, 1-alpha].
    GammaAlpha {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        alpha: f64,
    },
    /// Decay exponent for small stopping sets and delta_mu.
    SmallSets {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Fixed point rho = exp(mu k (rho^(k-1) - 1)).
    GiantRho {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        mu: f64,
    },
    /// Removed-fraction bound k(k-1)mu / (1 - k(k-1)mu) for r = 2.
    R2Bound {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        mu: f64,
    },
}

/// Twelve significant digits, fixed notation where it stays readable.
fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.11}", 0.0);
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), fmt12)
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let g = Hypergraph::generate(&EnsembleParams {
        n: a.size.n as usize,
        k: a.size.k,
        m: a.size.m()? as usize,
        ell: a.size.ell.unwrap_or(0) as usize,
        seed: a.seed,
    })?;
    let mut out = open_out(a.out.as_ref())?;
    g.write_edge_list(&mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_peel(a: &PeelArgs) -> Result<()> {
    let file = File::open(&a.edges).with_context(|| format!("opening {}", a.edges.display()))?;
    let mut g = Hypergraph::read_edge_list(BufReader::new(file))?;
    for &v in &a.remove {
        if v as usize >= g.n() {
            bail!("vertex {v} is out of range for n = {}", g.n());
        }
        g.remove_vertex(v);
    }
    let n = g.n();
    let mut cfg = match a.schedule {
        ScheduleArg::Batch => PeelConfig::batch(a.d),
        ScheduleArg::OneVertex => PeelConfig::one_vertex(a.d, a.seed),
    };
    if a.trace.is_some() {
        cfg = cfg.with_trace();
    }
    let res = peel_owned(g, &cfg)?;
    if let (Some(path), Some(trace)) = (&a.trace, &res.trace) {
        trace.write_csv(BufWriter::new(File::create(path)?))?;
    }
    let rem: Vec<String> = res.remainder.iter().map(u32::to_string).collect();
    println!("removed = {}, remainder = {{{}}}", n - res.remainder.len(), rem.join(", "));
    println!("peeled = {}", res.peeled);
    println!("schedule = {}", if cfg.schedule == Schedule::Batch { "batch" } else { "one_vertex_per_step" });
    Ok(())
}

fn cmd_chain(a: &ChainArgs) -> Result<()> {
    let params = a.size.chain_params(a.seed)?;
    let kind = ChainKind::from(a.kind);
    if let Some(trials) = a.trials {
        let p = chains::survival_frequency(kind, &params, a.steps, trials)?;
        let (lo, hi) = p.wilson(hyperpeel::math::Z99);
        println!("kind = {}", kind.name());
        println!("m = {}", params.m);
        println!("trials = {trials}");
        println!("survived = {}", p.successes);
        println!("survival = {}", fmt12(p.estimate()));
        println!("ci99 = [{}, {}]", fmt12(lo), fmt12(hi));
        return Ok(());
    }
    let run = chains::run_chain(kind, &params, a.steps, a.trace.is_some())?;
    if let (Some(path), Some(trace)) = (&a.trace, &run.trace) {
        chains::write_chain_trace_csv(kind, params.k, trace, BufWriter::new(File::create(path)?))?;
    }
    println!("kind = {}", kind.name());
    println!("m = {}", params.m);
    println!("survived = {}", run.survived);
    println!("died_at = {}", run.died_at.map_or("none".into(), |t| t.to_string()));
    println!("t = {}", run.final_state.t);
    println!("E_low = {}", run.final_state.e_low);
    for (j, c) in run.final_state.census.iter().enumerate() {
        if let Some(c) = c {
            println!("C_{j} = {c}");
        }
    }
    Ok(())
}

fn cmd_mgf(a: &MgfArgs) -> Result<()> {
    let q = MgfQuery {
        n: a.size.n,
        k: a.size.k,
        r: a.size.r,
        m: a.size.m()?,
        ell: a.size.ell(),
        t: a.t,
        lambda: a.lambda,
    };
    let mgf = analysis::mgf_exact_dominating(&q)?;
    let log_e = analysis::log_mgf_dominating_e(&q)?;
    println!("m = {}", q.m);
    println!("mgf = {}", fmt12(mgf));
    println!("log_mgf = {}", fmt12(mgf.ln()));
    println!("mgf_e_bar = {}", fmt12(log_e.exp()));
    println!("log_mgf_e_bar = {}", fmt12(log_e));
    if let Some(trials) = a.mc {
        let params = a.size.chain_params(a.seed)?;
        let est = chains::dominating_mgf_mc(&params, a.t, &[a.lambda], trials)?[0];
        println!("mc_trials = {trials}");
        println!("mc_mgf_e_bar = {}", fmt12(est.mean));
        println!("mc_stderr = {}", fmt12(est.stderr));
        let z = if est.stderr > 0.0 { (est.mean - log_e.exp()) / est.stderr } else { 0.0 };
        println!("mc_z = {}", fmt12(z));
    }
    Ok(())
}

fn print_report(rep: &RateReport) {
    println!("mu = {}", fmt12(rep.mu));
    println!("tau_star = {}", fmt_opt(rep.tau_star));
    println!("subcritical_exponent = {}", fmt_opt(rep.subcritical_exponent));
    println!("supercritical_exponent = {}", fmt_opt(rep.supercritical_exponent));
    println!("rho = {}", fmt_opt(rep.rho));
    println!("tau_saddle = {}", fmt_opt(rep.tau_saddle));
    let d = &rep.diagnostics;
    println!("nested_exponent = {}", fmt_opt(d.nested_exponent));
    println!("fixed_point_exponent = {}", fmt_opt(d.fixed_point_exponent));
    println!("rho_residual = {}", fmt_opt(d.rho_residual));
    println!("tau_residual = {}", fmt_opt(d.tau_residual));
    for w in &d.warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_threshold(a: &ThresholdArgs) -> Result<()> {
    let mu_c = analysis::mu_critical(a.k, a.r)?;
    let Some(mu) = a.mu else {
        println!("k = {}", a.k);
        println!("r = {}", a.r);
        println!("mu_c = {}", fmt12(mu_c));
        return Ok(());
    };
    if a.r < 3 {
        println!("k = {}", a.k);
        println!("r = {}", a.r);
        println!("mu_c = {}", fmt12(mu_c));
        println!("mu = {}", fmt12(mu));
        let rho = analysis::giant_component_rho(a.k, mu)?;
        println!("giant_rho = {}", fmt_opt(rho));
        if mu < mu_c {
            println!("removed_fraction_bound = {}", fmt12(analysis::subcritical_rate_r2(a.k, mu)?));
        }
        return Ok(());
    }
    let rep = RateReport::evaluate(a.k, a.r, mu, a.tau)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rep)?);
        return Ok(());
    }
    println!("k = {}", a.k);
    println!("r = {}", a.r);
    println!("mu_c = {}", fmt12(mu_c));
    print_report(&rep);
    Ok(())
}

fn load_config(path: &PathBuf, workers: Option<usize>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if workers.is_some() {
        cfg.workers = workers;
    }
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn cmd_sweep(a: &SweepArgs, workers: Option<usize>) -> Result<()> {
    let cfg = load_config(&a.config, workers)?;
    let started = harness::unix_now();
    let clock = Instant::now();
    let sweep = harness::sweep_transition(&cfg)?;
    let wall = clock.elapsed().as_secs_f64();
    harness::write_rows(&sweep.rows, TableFormat::Csv, io::stdout().lock())?;
    for c in &sweep.crossings {
        println!("crossing n = {}: mu_hat = {}", c.n, fmt_opt(c.mu_hat));
    }
    if let Some(base) = a.out.as_ref().or(cfg.output_path.as_ref()) {
        for p in harness::write_sweep(&cfg, &sweep, base, started, wall)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn cmd_survival(a: &SurvivalArgs, workers: Option<usize>) -> Result<()> {
    let cfg = load_config(&a.config, workers)?;
    let rows = harness::survival_vs_bound(&cfg, a.tau)?;
    harness::write_rows(&rows, TableFormat::Csv, io::stdout().lock())?;
    Ok(())
}

fn cmd_giant(a: &GiantArgs) -> Result<()> {
    let rep = harness::giant_component_check(a.k, a.mu, a.n, a.trials, a.seed)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rep)?);
        return Ok(());
    }
    println!("k = {}", rep.k);
    println!("mu = {}", fmt12(rep.mu));
    println!("n = {}", rep.n);
    println!("m = {}", rep.m);
    println!("trials = {}", rep.trials);
    println!("mean_fraction = {}", fmt12(rep.mean_fraction));
    println!("stderr = {}", fmt12(rep.stderr));
    println!("ci99 = [{}, {}]", fmt12(rep.ci99_lo), fmt12(rep.ci99_hi));
    println!("rho = {}", fmt_opt(rep.rho));
    println!("predicted_fraction = {}", fmt12(rep.predicted_fraction));
    Ok(())
}

fn cmd_appendix(c: &AppendixCommand) -> Result<()> {
    match *c {
        AppendixCommand::StoppingSets { n, k, m, d, l } => {
            let sizes: Vec<u64> = match l {
                Some(l) => vec![l],
                None => (0..=n).collect(),
            };
            println!("l,log_expected,expected");
            for l in sizes {
                let v = analysis::expected_stopping_sets_log(n, k, m, d, l)?;
                println!("{l},{},{}", fmt12(v), fmt12(v.exp()));
            }
        }
        AppendixCommand::LinearRate { k, gamma, delta } => {
            println!("rate = {}", fmt12(analysis::linear_ss_rate(k, gamma, delta)?));
        }
        AppendixCommand::GammaAlpha { k, alpha } => {
            println!("gamma_alpha = {}", fmt12(analysis::gamma_alpha(k, alpha)?));
        }
        AppendixCommand::SmallSets { k, mu, delta } => {
            let (exponent, delta_mu) = analysis::small_ss_bound(k, mu, delta)?;
            println!("exponent = {}", fmt12(exponent));
            println!("delta_mu = {}", fmt12(delta_mu));
        }
        AppendixCommand::GiantRho { k, mu } => {
            println!("rho = {}", fmt_opt(analysis::giant_component_rho(k, mu)?));
        }
        AppendixCommand::R2Bound { k, mu } => {
            println!("tau_bound = {}", fmt12(analysis::subcritical_rate_r2(k, mu)?));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(w) = cli.workers {
        if w == 0 {
            bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global()?;
    }
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Peel(a) => cmd_peel(a),
        Command::Chain(a) => cmd_chain(a),
        Command::Mgf(a) => cmd_mgf(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::Sweep(a) => cmd_sweep(a, cli.workers),
        Command::Survival(a) => cmd_survival(a, cli.workers),
        Command::Giant(a) => cmd_giant(a),
        Command::Appendix(c) => cmd_appendix(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
