//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Run all with `cargo test --test acceptance`; pass criterion numbers
//! (`cargo test --test acceptance -- 4 7`) to run a subset.

use std::time::Instant;

use hyperpeel::analysis::{self, MgfQuery};
use hyperpeel::chains::{self, ChainParams};
use hyperpeel::harness::{self, ExperimentConfig, SurvivalSource};
use hyperpeel::hypergraph::{EnsembleParams, Hypergraph};
use hyperpeel::math::{Proportion, Z99};
use hyperpeel::peeling::{self, max_stopping_set_bruteforce, peel, PeelConfig};
use hyperpeel::rng;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

const MU_C33: f64 = 1.0 / 12.0;

fn c1_threshold() -> Outcome {
    let mut worst: f64 = (analysis::mu_critical(3, 3).unwrap() - 1.0 / 12.0).abs();
    for k in 2..=8usize {
        let exact = 1.0 / (k * (k - 1)) as f64;
        worst = worst.max((analysis::mu_critical(k, 2).unwrap() - exact).abs());
    }
    outcome(worst <= 1e-14, format!("max abs error {worst:.3e}"))
}

fn phase_config(mu: f64, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(3, 3, vec![10_000], vec![mu], 100);
    cfg.master_seed = seed;
    cfg
}

fn c2_supercritical() -> Outcome {
    let table = harness::run_trials(&phase_config(0.15, 2)).unwrap();
    let hits = table.rows.iter().filter(|r| r.removed_fraction > 0.9).count();
    outcome(hits >= 90, format!("{hits}/100 trials removed > 90% of live vertices"))
}

fn c3_subcritical() -> Outcome {
    let table = harness::run_trials(&phase_config(0.04, 3)).unwrap();
    let ell = table.rows[0].ell;
    let hits = table.rows.iter().filter(|r| r.removed_count <= 2 * ell).count();
    let max = table.rows.iter().map(|r| r.removed_count).max().unwrap();
    outcome(hits >= 95, format!("{hits}/100 trials removed <= 2*ell = {} (max {max})", 2 * ell))
}

fn c4_sharpness() -> Outcome {
    let mut mus = Vec::new();
    let mut mu = 0.040;
    while mu < 0.1601 {
        mus.push((mu * 1000.0f64).round() / 1000.0);
        mu += 0.005;
    }
    let mut hats = Vec::new();
    for (i, &(n, trials)) in [(1_000u64, 100u64), (10_000, 60), (100_000, 30)].iter().enumerate() {
        let mut cfg = ExperimentConfig::new(3, 3, vec![n], mus.clone(), trials);
        cfg.master_seed = 40 + i as u64;
        cfg.bootstrap_resamples = 0;
        let sweep = harness::sweep_transition(&cfg).unwrap();
        hats.push((n, sweep.crossings[0].mu_hat));
    }
    let dist: Vec<f64> = hats
        .iter()
        .map(|(_, h)| h.map_or(f64::INFINITY, |h| (h - MU_C33).abs()))
        .collect();
    let monotone = dist.windows(2).all(|w| w[1] < w[0]);
    let close = dist[2] < 0.03;
    let shown: Vec<String> = hats
        .iter()
        .map(|(n, h)| format!("n={n}: {}", h.map_or("none".into(), |h| format!("{h:.4}"))))
        .collect();
    outcome(monotone && close, format!("crossings {}", shown.join(", ")))
}

fn random_instance<R: Rng>(rng: &mut R, n_lo: usize, n_hi: usize, k: usize) -> Hypergraph {
    let n = rng.random_range(n_lo.max(k + 1)..=n_hi);
    let m = rng.random_range(0..=2 * n);
    let ell = rng.random_range(0..=n / 2);
    Hypergraph::generate(&EnsembleParams {
        n,
        k,
        m,
        ell,
        seed: rng.random(),
    })
    .unwrap()
}

fn c5_oracle() -> Outcome {
    let mut rng = rng::from_seed(5);
    let mut agree = 0;
    for _ in 0..500 {
        let k = rng.random_range(3..=4);
        let d = rng.random_range(2..=3);
        let h = random_instance(&mut rng, 4, 14, k);
        let peeled = peel(&h, &PeelConfig::batch(d)).unwrap().remainder;
        let oracle = max_stopping_set_bruteforce(&h, d).unwrap();
        agree += usize::from(peeled == oracle);
    }
    outcome(agree == 500, format!("{agree}/500 remainders equal the brute-force maximum stopping set"))
}

fn c6_schedule() -> Outcome {
    let mut rng = rng::from_seed(6);
    let mut agree = 0;
    for _ in 0..200 {
        let k = rng.random_range(2..=5);
        let d = rng.random_range(2..=k);
        let h = random_instance(&mut rng, 10, 600, k);
        let batch = peel(&h, &PeelConfig::batch(d)).unwrap().remainder;
        let single = peel(&h, &PeelConfig::one_vertex(d, rng.random())).unwrap().remainder;
        agree += usize::from(batch == single);
    }
    outcome(agree == 200, format!("{agree}/200 batch and one-vertex remainders identical"))
}

fn c7_mgf_exact() -> Outcome {
    let (n, ell, mu) = (10_000u64, 100u64, 0.05);
    let m = harness::edge_count(mu, n, ell, 3);
    let lambdas = [-0.3, -0.1, 0.1, 0.3];
    let mut inside = 0;
    let mut worst = 0.0f64;
    for (i, t) in [20u64, 50, 100].into_iter().enumerate() {
        let params = ChainParams {
            n,
            k: 3,
            r: 3,
            m,
            ell,
            seed: 70 + i as u64,
        };
        let mc = chains::dominating_mgf_mc(&params, t, &lambdas, 100_000).unwrap();
        for est in mc {
            let exact = analysis::mgf_dominating_e(&MgfQuery {
                n,
                k: 3,
                r: 3,
                m,
                ell,
                t,
                lambda: est.lambda,
            })
            .unwrap();
            let z = (est.mean - exact) / est.stderr;
            worst = worst.max(z.abs());
            inside += usize::from(z.abs() <= Z99);
        }
    }
    outcome(inside == 12, format!("{inside}/12 cells inside the 99% CI, max |z| = {worst:.2}"))
}

fn c8_mgf_asymptotics() -> Outcome {
    let mu = 0.05;
    let points = [(0.5, 0.2), (0.3, 0.3), (1.0, 0.1), (0.5, -0.2)];
    let gap = |n: u64, ell: u64, tau: f64, lambda: f64| {
        let t = (tau * ell as f64).floor() as u64;
        let q = MgfQuery {
            n,
            k: 3,
            r: 3,
            m: harness::edge_count(mu, n, ell, 3),
            ell,
            t,
            lambda,
        };
        let v = analysis::log_mgf_dominating_e(&q).unwrap() / ell as f64;
        (v - analysis::phi(3, 3, mu, lambda, tau)).abs()
    };
    let mut ok = 0;
    let mut shown = Vec::new();
    for &(tau, lambda) in &points {
        let small = gap(10_000, 100, tau, lambda);
        let large = gap(160_000, 400, tau, lambda);
        ok += usize::from(large < small);
        shown.push(format!("({tau},{lambda}): {small:.2e} -> {large:.2e}"));
    }
    outcome(ok == 4, format!("gaps {}", shown.join("; ")))
}

fn c9_rate_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for &(k, r) in &[(3usize, 3usize), (4, 3), (5, 4)] {
        let mu_c = analysis::mu_critical(k, r).unwrap();
        for f in [1.05, 1.2, 1.5, 2.0, 3.0] {
            let rep = analysis::supercritical_rate(k, r, f * mu_c).unwrap();
            let d = &rep.diagnostics;
            let diff = (d.nested_exponent.unwrap() - d.fixed_point_exponent.unwrap()).abs();
            worst = worst.max(diff);
            count += 1;
        }
    }
    outcome(worst <= 1e-8, format!("{count} cases, max |nested - fixed point| = {worst:.2e}"))
}

fn c10_chain_law() -> Outcome {
    let params = ChainParams {
        n: 200,
        k: 3,
        r: 2,
        m: 300,
        ell: 20,
        seed: 10,
    };
    let rep = chains::graph_vs_chain_census(&params, 50, 10_000).unwrap();
    let shown: Vec<String> = rep
        .coordinates
        .iter()
        .map(|c| format!("{}: z={:.2}", c.coordinate, c.z))
        .collect();
    outcome(rep.max_abs_z() < 4.0, shown.join(", "))
}

fn c11_domination() -> Outcome {
    let mut pass = true;
    let mut shown = Vec::new();
    for (i, mu) in [0.05, 0.12].into_iter().enumerate() {
        let params = ChainParams {
            n: 10_000,
            k: 3,
            r: 3,
            m: harness::edge_count(mu, 10_000, 100, 3),
            ell: 100,
            seed: 110 + i as u64,
        };
        let [low, exact, high] = chains::domination_survival(&params, 50, 10_000).unwrap();
        let ordered = |a: &Proportion, b: &Proportion| {
            a.estimate() <= b.estimate() || a.wilson(Z99).0 <= b.wilson(Z99).1
        };
        pass &= ordered(&low, &exact) && ordered(&exact, &high);
        shown.push(format!(
            "mu={mu}: {:.4} <= {:.4} <= {:.4}",
            low.estimate(),
            exact.estimate(),
            high.estimate()
        ));
    }
    outcome(pass, shown.join("; "))
}

/// Mean number of d-stopping sets of each size over all ordered 4-tuples of
/// 3-subsets of an 8-set.
fn exhaustive_stopping_set_means(d: usize) -> [f64; 9] {
    const N: u32 = 8;
    let edges: Vec<u32> = (0u32..1 << N).filter(|e| e.count_ones() == 3).collect();
    let allowed = |s: u32| s == 0 || s as usize >= d;
    // Bit S of an edge's mask is set when S is compatible with that edge.
    let masks: Vec<[u64; 4]> = edges
        .iter()
        .map(|&e| {
            let mut m = [0u64; 4];
            for s in 0u32..1 << N {
                if allowed((s & e).count_ones()) {
                    m[s as usize / 64] |= 1 << (s % 64);
                }
            }
            m
        })
        .collect();
    // Spot-check the masks against the library's stopping-set predicate.
    let h = Hypergraph::from_edge_list(8, 3, &[[0u32, 1, 2]], &[]).unwrap();
    for s in 0u32..1 << N {
        let set: Vec<u32> = (0..N).filter(|v| s >> v & 1 == 1).collect();
        let lib = peeling::is_stopping_set(&h, &set, d).unwrap();
        assert_eq!(lib, masks[0][s as usize / 64] >> (s % 64) & 1 == 1);
    }
    let mut by_size = [[0u64; 4]; 9];
    for s in 0u32..1 << N {
        by_size[s.count_ones() as usize][s as usize / 64] |= 1 << (s % 64);
    }
    let and = |a: &[u64; 4], b: &[u64; 4]| [a[0] & b[0], a[1] & b[1], a[2] & b[2], a[3] & b[3]];
    let mut totals = [0u64; 9];
    for m1 in &masks {
        for m2 in &masks {
            let m12 = and(m1, m2);
            for m3 in &masks {
                let m123 = and(&m12, m3);
                for m4 in &masks {
                    let all = and(&m123, m4);
                    for (l, size) in by_size.iter().enumerate() {
                        totals[l] += and(&all, size).iter().map(|w| u64::from(w.count_ones())).sum::<u64>();
                    }
                }
            }
        }
    }
    let graphs = (edges.len() as f64).powi(4);
    totals.map(|t| t as f64 / graphs)
}

fn c12_appendix_a() -> Outcome {
    let mut worst = 0.0f64;
    for d in [2usize, 3] {
        let means = exhaustive_stopping_set_means(d);
        for (l, &mean) in means.iter().enumerate() {
            let formula = analysis::expected_stopping_sets_log(8, 3, 4, d, l as u64).unwrap().exp();
            worst = worst.max((formula - mean).abs() / mean);
        }
    }
    outcome(worst <= 1e-10, format!("max relative error {worst:.2e} over d in {{2,3}}, l = 0..=8"))
}

fn c13_giant() -> Outcome {
    let rep = harness::giant_component_check(2, 1.0, 100_000, 50, 13).unwrap();
    let rho = rep.rho.unwrap();
    let pass = rep.deviation() <= 0.02 && (rho - 0.2032).abs() < 1e-4;
    outcome(
        pass,
        format!("mean fraction {:.4} vs 1 - rho = {:.4} (rho = {rho:.6})", rep.mean_fraction, rep.predicted_fraction),
    )
}

fn c14_chernoff() -> Outcome {
    let mut cfg = ExperimentConfig::new(3, 3, vec![10_000], vec![0.05], 10_000);
    cfg.master_seed = 14;
    cfg.survival_source = SurvivalSource::Graph;
    let rows = harness::survival_vs_bound(&cfg, 0.5).unwrap();
    let row = &rows[0];
    let bound = row.bound.unwrap();
    outcome(
        row.consistent == Some(true),
        format!(
            "empirical {:.4} (stderr {:.4}, {} steps) vs bound {bound:.4}",
            row.empirical, row.stderr, row.steps
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: &[Criterion] = &[
    (1, "threshold constant", c1_threshold),
    (2, "supercritical phase removes nearly everything", c2_supercritical),
    (3, "subcritical phase removes O(ell)", c3_subcritical),
    (4, "crossing moves toward mu_c", c4_sharpness),
    (5, "peeling matches brute-force stopping set", c5_oracle),
    (6, "schedule invariance", c6_schedule),
    (7, "exact MGF of the dominating chain", c7_mgf_exact),
    (8, "MGF approaches the rate function", c8_mgf_asymptotics),
    (9, "nested and fixed-point exponents agree", c9_rate_identity),
    (10, "graph census has the chain law", c10_chain_law),
    (11, "domination ordering of survival", c11_domination),
    (12, "expected stopping-set counts", c12_appendix_a),
    (13, "giant component size", c13_giant),
    (14, "survival below the Chernoff bound", c14_chernoff),
];

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for &(id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let Outcome { pass, detail } = check();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} criterion {id:>2} ({name}): {detail} [{secs:.1}s]",
            if pass { "PASS" } else { "FAIL" }
        );
        failures += usize::from(!pass);
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
