//! Closed forms and numeric solvers for the peeling threshold.
//!
//! Everything is parametrized by `(k, r)` with `m = μ n^{r-1} / ℓ^{r-2}`.
//! The central object is the rate function
//!
//! ```text
//! φ(μ, λ, τ) = μ (e^{aλ} - 1) C(k, r-1) (1 + τ)^{r-1} - λτ,   a = k - r + 1,
//! ```
//!
//! whose infimum over `λ` has the closed form `c·(x - 1 - x ln x)` with
//! `c = μ C(k, r-1) (1+τ)^{r-1}` and `x = τ / (a c)`.

pub mod appendix;
pub mod mgf;
pub mod solve;

use serde::{Deserialize, Serialize};

use crate::math::{choose_f64, ln_choose, pow0};
use crate::{Error, Result};

pub use appendix::{
    delta_mu, expected_stopping_sets_log, gamma_alpha, giant_component_rho, linear_ss_rate, small_ss_bound,
    subcritical_rate_r2,
};
pub use mgf::{log_mgf_dominating_e, log_mgf_exact_dominating, mgf_dominating_e, mgf_exact_dominating, MgfQuery};

/// Cap on the `τ` search domain.
pub const TAU_MAX: f64 = 1e3;

const ROOT_TOL: f64 = 1e-12;
const GOLDEN_TOL: f64 = 1e-10;

fn check_kr(k: usize, r: usize) -> Result<()> {
    if r < 2 || r > k {
        return Err(Error::param(format!("need 2 <= r <= k, got k = {k}, r = {r}")));
    }
    Ok(())
}

/// `μ_c(k, r) = C(k, r)^{-1} (r-2)^{r-2} / (r (r-1)^{r-1})`, with `0^0 = 1`.
pub fn mu_critical(k: usize, r: usize) -> Result<f64> {
    check_kr(k, r)?;
    let rf = r as f64;
    let num = pow0(rf - 2.0, r as i32 - 2);
    let den = rf * (rf - 1.0).powi(r as i32 - 1);
    let c = choose_f64(k as u64, r as u64);
    if c.is_finite() && num.is_finite() && den.is_finite() {
        return Ok(num / den / c);
    }
    let ln_num = if r == 2 { 0.0 } else { (rf - 2.0) * (rf - 2.0).ln() };
    Ok((ln_num - rf.ln() - (rf - 1.0) * (rf - 1.0).ln() - ln_choose(k as u64, r as u64)).exp())
}

/// `c(τ) = μ C(k, r-1) (1+τ)^{r-1}`, the coefficient of `e^{aλ} - 1` in `φ`.
fn phi_coefficient(k: usize, r: usize, mu: f64, tau: f64) -> f64 {
    mu * choose_f64(k as u64, r as u64 - 1) * (1.0 + tau).powi(r as i32 - 1)
}

pub fn phi(k: usize, r: usize, mu: f64, lambda: f64, tau: f64) -> f64 {
    let a = (k - r + 1) as f64;
    phi_coefficient(k, r, mu, tau) * (a * lambda).exp_m1() - lambda * tau
}

/// `φ^{(j)} = μ (e^λ - 1) C(k, k-j) (1+τ)^{k-j}` for `k-r+2 <= j <= k`.
pub fn phi_j(k: usize, r: usize, mu: f64, lambda: f64, tau: f64, j: usize) -> Result<f64> {
    check_kr(k, r)?;
    if j < k - r + 2 || j > k {
        return Err(Error::param(format!("need {} <= j <= {k}, got j = {j}", k - r + 2)));
    }
    Ok(mu * lambda.exp_m1() * choose_f64(k as u64, (k - j) as u64) * (1.0 + tau).powi((k - j) as i32))
}

/// The unconstrained minimizer of `φ` in `λ`:
/// `e^{aλ*} = τ / (μ r C(k, r) (1+τ)^{r-1})`.
pub fn stationary_lambda(k: usize, r: usize, mu: f64, tau: f64) -> f64 {
    let a = (k - r + 1) as f64;
    let denom = mu * r as f64 * choose_f64(k as u64, r as u64) * (1.0 + tau).powi(r as i32 - 1);
    (tau / denom).ln() / a
}

/// `inf φ` over `λ > 0` (`positive`) or `λ < 0`, using the stationary point
/// when it lies on the requested side and the `λ → 0` boundary (value 0)
/// otherwise.
pub fn inf_phi_over_lambda(k: usize, r: usize, mu: f64, tau: f64, positive: bool) -> f64 {
    let a = (k - r + 1) as f64;
    let c = phi_coefficient(k, r, mu, tau);
    let x = tau / (a * c);
    let inside = if positive { x > 1.0 } else { x < 1.0 };
    if !inside {
        return 0.0;
    }
    if x == 0.0 {
        return -c;
    }
    c * (x - 1.0 - x * x.ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum TauStar {
    Root(f64),
    /// `μ = μ_c`: the root sits on the boundary `1/(r-2)`.
    Boundary,
    /// `μ > μ_c`: no root.
    Supercritical,
}

impl TauStar {
    pub fn root(self) -> Option<f64> {
        match self {
            TauStar::Root(t) => Some(t),
            _ => None,
        }
    }
}

/// Root in `(0, 1/(r-2))` of `μ = τ / (C(k, r) r (1+τ)^{r-1})`.
pub fn tau_star(k: usize, r: usize, mu: f64) -> Result<TauStar> {
    check_kr(k, r)?;
    if r < 3 {
        return Err(Error::param("tau_star needs r >= 3"));
    }
    if !(mu > 0.0) {
        return Err(Error::param(format!("need mu > 0, got {mu}")));
    }
    let mu_c = mu_critical(k, r)?;
    if mu > mu_c {
        return Ok(TauStar::Supercritical);
    }
    if mu == mu_c {
        return Ok(TauStar::Boundary);
    }
    let denom = r as f64 * choose_f64(k as u64, r as u64);
    let f = |tau: f64| tau / (denom * (1.0 + tau).powi(r as i32 - 1)) - mu;
    let (root, _) = solve::bisect(f, 0.0, 1.0 / (r as f64 - 2.0), ROOT_TOL)?;
    Ok(TauStar::Root(root))
}

/// `inf_{λ>0, τ' ∈ (τ*, τ)} φ(μ, λ, τ')`.
pub fn subcritical_rate(k: usize, r: usize, mu: f64, tau: f64) -> Result<f64> {
    let ts = tau_star(k, r, mu)?
        .root()
        .ok_or_else(|| Error::param(format!("mu = {mu} is not below the threshold")))?;
    if !(tau > ts) {
        return Err(Error::param(format!("need tau > tau* = {ts}, got {tau}")));
    }
    let g = |t: f64| -inf_phi_over_lambda(k, r, mu, t, true);
    let grid = solve::linspace(ts, tau, 2001);
    let (_, best, _) = solve::grid_max(g, &grid, 1e-13);
    Ok(-best)
}

/// Solver bookkeeping carried by [`RateReport`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub nested_exponent: Option<f64>,
    pub nested_tau: Option<f64>,
    pub nested_iterations: usize,
    pub fixed_point_exponent: Option<f64>,
    pub fixed_point_iterations: usize,
    pub rho_residual: Option<f64>,
    pub tau_residual: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub k: usize,
    pub r: usize,
    pub mu: f64,
    pub mu_c: f64,
    pub tau_star: Option<f64>,
    pub subcritical_exponent: Option<f64>,
    pub supercritical_exponent: Option<f64>,
    pub rho: Option<f64>,
    pub tau_saddle: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl RateReport {
    /// Report for any `μ`: below the threshold it carries `τ*` and, when
    /// `tau` is given and admissible, the subcritical exponent; above it
    /// the supercritical exponent from both solvers.
    pub fn evaluate(k: usize, r: usize, mu: f64, tau: Option<f64>) -> Result<Self> {
        check_kr(k, r)?;
        if r < 3 {
            return Err(Error::param("rate reports need r >= 3"));
        }
        let mu_c = mu_critical(k, r)?;
        if mu > mu_c {
            return supercritical_rate(k, r, mu);
        }
        let mut report = RateReport {
            k,
            r,
            mu,
            mu_c,
            tau_star: None,
            subcritical_exponent: None,
            supercritical_exponent: None,
            rho: None,
            tau_saddle: None,
            diagnostics: Diagnostics::default(),
        };
        match tau_star(k, r, mu)? {
            TauStar::Root(ts) => {
                report.tau_star = Some(ts);
                if let Some(tau) = tau {
                    if tau > ts {
                        report.subcritical_exponent = Some(subcritical_rate(k, r, mu, tau)?);
                    } else {
                        report
                            .diagnostics
                            .warnings
                            .push(format!("tau = {tau} is not above tau* = {ts}; no bound"));
                    }
                }
            }
            _ => report
                .diagnostics
                .warnings
                .push(format!("mu = mu_c: tau* sits on the boundary 1/(r-2) = {}", 1.0 / (r as f64 - 2.0))),
        }
        Ok(report)
    }

    /// The nested and fixed-point exponents differ by at most `tol`.
    pub fn methods_agree(&self, tol: f64) -> bool {
        match (self.diagnostics.nested_exponent, self.diagnostics.fixed_point_exponent) {
            (Some(a), Some(b)) => (a - b).abs() <= tol,
            _ => false,
        }
    }
}

/// `sup_{τ>0} inf_{λ<0} φ` by nested optimization over `τ`.
/// Returns `(exponent, τ, iterations)`.
pub fn supercritical_nested(k: usize, r: usize, mu: f64) -> (f64, f64, usize) {
    let f = |t: f64| inf_phi_over_lambda(k, r, mu, t, false);
    let mut grid = vec![0.0];
    grid.extend(solve::geomspace(1e-6, TAU_MAX, 1200));
    solve::grid_max(f, &grid, GOLDEN_TOL)
}

/// `b(τ) = μ (r-1) C(k, r-1) (1+τ)^{r-2}` so that the saddle `ρ` solves
/// `ρ = exp(b(τ)(ρ^a - 1))`.
fn rho_coefficient(k: usize, r: usize, mu: f64, tau: f64) -> f64 {
    mu * (r as f64 - 1.0) * choose_f64(k as u64, r as u64 - 1) * (1.0 + tau).powi(r as i32 - 2)
}

/// `μ r C(k, r) (1+τ)^{r-1} ρ^a - τ`.
fn tau_residual(k: usize, r: usize, mu: f64, rho: f64, tau: f64) -> f64 {
    let a = (k - r + 1) as i32;
    mu * r as f64 * choose_f64(k as u64, r as u64) * (1.0 + tau).powi(r as i32 - 1) * rho.powi(a) - tau
}

fn rho_residual(k: usize, r: usize, mu: f64, rho: f64, tau: f64) -> f64 {
    let a = (k - r + 1) as i32;
    rho - (rho_coefficient(k, r, mu, tau) * (rho.powi(a) - 1.0)).exp()
}

fn rho_of_tau(k: usize, r: usize, mu: f64, tau: f64) -> Result<Option<f64>> {
    let a = (k - r + 1) as f64;
    Ok(solve::exp_fixed_point(rho_coefficient(k, r, mu, tau), a, 1e-15)?.map(|(rho, _)| rho))
}

/// Solution `(ρ, τ, iterations)` of the saddle system with the largest
/// exponent: `ρ(τ)` from its fixed-point equation, then the stationarity
/// residual in `τ` is bracketed on a scan, bisected and polished by Newton
/// steps on the joint system.
pub fn supercritical_fixed_point(k: usize, r: usize, mu: f64) -> Result<(f64, f64, usize)> {
    let resid = |tau: f64| -> Result<f64> {
        let rho = rho_of_tau(k, r, mu, tau)?.unwrap_or(1.0);
        Ok(tau_residual(k, r, mu, rho, tau))
    };
    let grid = solve::geomspace(1e-8, TAU_MAX, 4000);
    let values = grid.iter().map(|&t| resid(t)).collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, f64, f64)> = None;
    let mut iterations = 0;
    for i in 1..grid.len() {
        if values[i - 1].signum() == values[i].signum() {
            continue;
        }
        let (tau, it) = solve::bisect(
            |t| resid(t).unwrap_or(f64::NAN),
            grid[i - 1],
            grid[i],
            1e-15 * grid[i],
        )?;
        iterations += it;
        let Some(rho) = rho_of_tau(k, r, mu, tau)? else {
            continue;
        };
        let (rho, tau, it) = newton_polish(k, r, mu, rho, tau);
        iterations += it;
        let exponent = rho.ln() * (1.0 - (r as f64 - 2.0) * tau) / (r as f64 - 1.0);
        if best.is_none_or(|b| exponent > b.2) {
            best = Some((rho, tau, exponent));
        }
    }
    match best {
        Some((rho, tau, _)) => Ok((rho, tau, iterations)),
        None => Err(Error::Solver {
            msg: "no saddle point found for the (rho, tau) system".into(),
            residual: values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())),
            iterations,
        }),
    }
}

/// Newton iteration on `F1 = u - b(τ)(e^{au} - 1)`,
/// `F2 = μ r C(k,r)(1+τ)^{r-1} e^{au} - τ` in `(u = ln ρ, τ)`, with step
/// halving whenever the residual norm does not decrease.
fn newton_polish(k: usize, r: usize, mu: f64, rho: f64, tau: f64) -> (f64, f64, usize) {
    let a = (k - r + 1) as f64;
    let rf = r as f64;
    let b0 = mu * (rf - 1.0) * choose_f64(k as u64, r as u64 - 1);
    let c0 = mu * rf * choose_f64(k as u64, r as u64);
    let f = |u: f64, t: f64| {
        let b = b0 * (1.0 + t).powf(rf - 2.0);
        let c = c0 * (1.0 + t).powf(rf - 1.0);
        (u - b * (a * u).exp_m1(), c * (a * u).exp() - t)
    };
    let norm = |(x, y): (f64, f64)| x.hypot(y);
    let (mut u, mut t) = (rho.ln(), tau);
    let mut fx = f(u, t);
    let mut iterations = 0;
    for _ in 0..50 {
        if norm(fx) < 1e-15 {
            break;
        }
        iterations += 1;
        let b = b0 * (1.0 + t).powf(rf - 2.0);
        let db = b0 * (rf - 2.0) * (1.0 + t).powf(rf - 3.0);
        let c = c0 * (1.0 + t).powf(rf - 1.0);
        let dc = c0 * (rf - 1.0) * (1.0 + t).powf(rf - 2.0);
        let e = (a * u).exp();
        let j11 = 1.0 - a * b * e;
        let j12 = -db * (e - 1.0);
        let j21 = a * c * e;
        let j22 = dc * e - 1.0;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let du = (fx.0 * j22 - fx.1 * j12) / det;
        let dt = (j11 * fx.1 - j21 * fx.0) / det;
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-6 {
            let (un, tn) = (u - step * du, t - step * dt);
            if un < 0.0 && tn > 0.0 {
                let fn_ = f(un, tn);
                if norm(fn_) < norm(fx) {
                    u = un;
                    t = tn;
                    fx = fn_;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (u.exp(), t, iterations)
}

/// `sup_{τ>0} inf_{λ<0} φ(μ, λ, τ)` for `μ > μ_c`, computed both by nested
/// optimization and from the saddle system as
/// `ln ρ · (1 - (r-2)τ) / (r-1)`.
pub fn supercritical_rate(k: usize, r: usize, mu: f64) -> Result<RateReport> {
    check_kr(k, r)?;
    if r < 3 {
        return Err(Error::param("supercritical_rate needs r >= 3"));
    }
    let mu_c = mu_critical(k, r)?;
    if !(mu > mu_c) {
        return Err(Error::param(format!("need mu > mu_c = {mu_c}, got {mu}")));
    }
    let mut diagnostics = Diagnostics::default();
    let (nested_tau, nested, nested_iterations) = supercritical_nested(k, r, mu);
    diagnostics.nested_exponent = Some(nested);
    diagnostics.nested_tau = Some(nested_tau);
    diagnostics.nested_iterations = nested_iterations;
    if nested_tau >= TAU_MAX * (1.0 - 1e-9) {
        diagnostics.warnings.push(format!("tau search hit the cap {TAU_MAX}"));
    }
    let (rho, tau, iterations) = supercritical_fixed_point(k, r, mu)?;
    let exponent = rho.ln() * (1.0 - (r as f64 - 2.0) * tau) / (r as f64 - 1.0);
    diagnostics.fixed_point_exponent = Some(exponent);
    diagnostics.fixed_point_iterations = iterations;
    let rr = rho_residual(k, r, mu, rho, tau);
    let tr = tau_residual(k, r, mu, rho, tau);
    diagnostics.rho_residual = Some(rr);
    diagnostics.tau_residual = Some(tr);
    if rr.abs() > 1e-10 || tr.abs() > 1e-10 * tau.max(1.0) {
        return Err(Error::Solver {
            msg: "saddle system did not converge".into(),
            residual: rr.abs().max(tr.abs()),
            iterations,
        });
    }
    Ok(RateReport {
        k,
        r,
        mu,
        mu_c,
        tau_star: None,
        subcritical_exponent: None,
        supercritical_exponent: Some(exponent),
        rho: Some(rho),
        tau_saddle: Some(tau),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::choose_exact;

    #[test]
    fn threshold_values() {
        assert!((mu_critical(3, 3).unwrap() - 1.0 / 12.0).abs() < 1e-16);
        assert!((mu_critical(4, 3).unwrap() - 1.0 / 48.0).abs() < 1e-16);
        for k in 2..=8 {
            let v = mu_critical(k, 2).unwrap() * (k * (k - 1)) as f64;
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(mu_critical(3, 4).is_err());
        assert!(mu_critical(3, 1).is_err());
    }

    #[test]
    fn threshold_identity_exact() {
        for k in 2..=12u64 {
            for r in 2..=k {
                let lhs = (k - r + 1) as u128 * choose_exact(k, r - 1).unwrap();
                let rhs = r as u128 * choose_exact(k, r).unwrap();
                assert_eq!(lhs, rhs, "k={k} r={r}");
            }
        }
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(3, 3, 0.05, 0.0, 0.7), 0.0);
        let expect = 0.05 * (0.1f64.exp() - 1.0) * 3.0 * 1.3 * 1.3 - 0.1 * 0.3;
        assert!((phi(3, 3, 0.05, 0.1, 0.3) - expect).abs() < 1e-16);
    }

    #[test]
    fn phi_derivative_at_zero() {
        for &(k, r, mu, tau) in &[(3, 3, 0.05, 0.3), (4, 3, 0.01, 1.2), (6, 4, 0.002, 0.5)] {
            let h = 1e-6;
            let fd = (phi(k, r, mu, h, tau) - phi(k, r, mu, -h, tau)) / (2.0 * h);
            let exact = mu * r as f64 * choose_f64(k as u64, r as u64) * (1.0 + tau).powi(r as i32 - 1) - tau;
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3), "fd={fd} exact={exact}");
        }
    }

    #[test]
    fn phi_j_values() {
        assert_eq!(phi_j(4, 3, 0.1, 0.0, 0.5, 3).unwrap(), 0.0);
        assert!((phi_j(4, 3, 0.1, 0.4, 0.5, 4).unwrap() - 0.1 * 0.4f64.exp_m1()).abs() < 1e-16);
        // j = k - r + 2 at τ = 1/(r - 2)
        let (k, r, mu, lambda) = (6usize, 4usize, 0.01, 0.3);
        let tau = 1.0 / (r as f64 - 2.0);
        let coef = mu * choose_f64(k as u64, r as u64 - 2) * ((r as f64 - 1.0) / (r as f64 - 2.0)).powi(r as i32 - 2);
        let v = phi_j(k, r, mu, lambda, tau, k - r + 2).unwrap();
        assert!((v - coef * lambda.exp_m1()).abs() < 1e-15);
        assert!(phi_j(4, 3, 0.1, 0.4, 0.5, 2).is_err());
        assert!(phi_j(4, 3, 0.1, 0.4, 0.5, 5).is_err());
    }

    #[test]
    fn stationary_lambda_matches_numeric_minimizer() {
        for &(k, r, mu, tau) in &[(3, 3, 0.05, 0.5), (3, 3, 0.12, 0.5), (5, 4, 0.003, 0.8), (4, 3, 0.04, 0.2)] {
            let ls = stationary_lambda(k, r, mu, tau);
            let (lnum, _, _) = solve::golden_max(|l| -phi(k, r, mu, l, tau), -5.0, 5.0, 1e-12);
            assert!((ls - lnum).abs() < 1e-8, "closed={ls} numeric={lnum}");
            let side = ls > 0.0;
            let inf = inf_phi_over_lambda(k, r, mu, tau, side);
            assert!((inf - phi(k, r, mu, ls, tau)).abs() < 1e-14);
        }
    }

    #[test]
    fn phi_is_convex_in_lambda() {
        for &(k, r, mu, tau) in &[(3, 3, 0.05, 0.5), (6, 3, 0.001, 2.0), (8, 5, 1e-4, 0.1)] {
            let h = 1e-3;
            for i in -20..=20 {
                let l = i as f64 * 0.1;
                let d2 = phi(k, r, mu, l + h, tau) - 2.0 * phi(k, r, mu, l, tau) + phi(k, r, mu, l - h, tau);
                assert!(d2 > -1e-15);
            }
        }
    }

    #[test]
    fn tau_star_values() {
        let ts = tau_star(3, 3, 0.05).unwrap().root().unwrap();
        let closed = (0.7 - (0.49f64 - 4.0 * 0.15 * 0.15).sqrt()) / 0.3;
        assert!((ts - closed).abs() < 1e-11);
        assert!((ts - 0.2251).abs() < 1e-4);
        let small = tau_star(3, 3, 1e-8).unwrap().root().unwrap();
        assert!(small < 1e-6);
        assert_eq!(tau_star(3, 3, 1.0 / 12.0).unwrap(), TauStar::Boundary);
        assert_eq!(tau_star(3, 3, 0.1).unwrap(), TauStar::Supercritical);
        assert!(tau_star(3, 2, 0.01).is_err());
    }

    #[test]
    fn subcritical_rate_values() {
        let rate = subcritical_rate(3, 3, 0.05, 1.0).unwrap();
        assert!(rate < -0.01);
        assert!((rate - SUBCRITICAL_3_3_005_1).abs() < 1e-9, "rate = {rate}");
        let ts = tau_star(3, 3, 0.05).unwrap().root().unwrap();
        let near = subcritical_rate(3, 3, 0.05, ts + 1e-6).unwrap();
        assert!(near <= 0.0 && near > -1e-9);
        let mut prev = 0.0;
        for tau in [0.3, 0.5, 0.8, 1.0, 2.0, 5.0] {
            let v = subcritical_rate(3, 3, 0.05, tau).unwrap();
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!(subcritical_rate(3, 3, 0.05, 0.2).is_err());
        assert!(subcritical_rate(3, 3, 0.1, 1.0).is_err());
    }

    const SUBCRITICAL_3_3_005_1: f64 = -0.110_825_623_765_990_7;

    #[test]
    fn supercritical_methods_agree() {
        for &(k, r) in &[(3usize, 3usize), (4, 3), (5, 4), (6, 3), (8, 5)] {
            let mu_c = mu_critical(k, r).unwrap();
            for f in [1.01, 1.2, 1.5, 2.0, 4.0] {
                let rep = supercritical_rate(k, r, f * mu_c).unwrap();
                let e = rep.supercritical_exponent.unwrap();
                assert!(e < 0.0);
                assert!(rep.methods_agree(1e-8), "k={k} r={r} f={f} {:?}", rep.diagnostics);
                let rho = rep.rho.unwrap();
                assert!(rho > 0.0 && rho < 1.0);
                assert!(rep.diagnostics.rho_residual.unwrap().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn supercritical_exponent_vanishes_at_threshold() {
        let mu_c = mu_critical(3, 3).unwrap();
        let near = supercritical_rate(3, 3, mu_c * (1.0 + 1e-4)).unwrap();
        let far = supercritical_rate(3, 3, mu_c * 1.1).unwrap();
        let en = near.supercritical_exponent.unwrap();
        assert!(en < 0.0 && en > -1e-6);
        assert!(far.supercritical_exponent.unwrap() < en);
        assert!(supercritical_rate(3, 3, 0.05).is_err());
    }

    #[test]
    fn sign_conditions_on_grid() {
        for k in 3..=8 {
            for r in 3..=k {
                let mu_c = mu_critical(k, r).unwrap();
                let mu = 0.7 * mu_c;
                let ts = tau_star(k, r, mu).unwrap().root().unwrap();
                let tau = ts * 1.5;
                assert!(stationary_lambda(k, r, mu, tau) > 0.0);
                assert!(inf_phi_over_lambda(k, r, mu, tau, true) < 0.0);
                let rep = supercritical_rate(k, r, 1.3 * mu_c).unwrap();
                assert!(rep.supercritical_exponent.unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn report_serializes() {
        let rep = RateReport::evaluate(3, 3, 0.05, Some(0.5)).unwrap();
        assert!(rep.subcritical_exponent.unwrap() < 0.0);
        let json = serde_json::to_string(&rep).unwrap();
        let back: RateReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
        let rep = RateReport::evaluate(3, 3, 0.12, None).unwrap();
        assert!(rep.methods_agree(1e-8));
    }
}
