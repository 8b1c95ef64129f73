//! Stopping-set counts and the `r = 2` regime.

use crate::analysis::solve;
use crate::math::{binary_entropy, ln_choose, NeumaierSum};
use crate::{Error, Result};

/// `ln E[S(l)]` where `S(l)` counts d-stopping sets of size `l` in
/// `G_k(n, m, 0)`:
///
/// ```text
/// E[S(l)] = C(n, l) · (Σ_{s ∈ {0, d..=k}} C(l, s) C(n-l, k-s) / C(n, k))^m.
/// ```
///
/// The per-edge probability is formed from whichever of the allowed or
/// forbidden intersection sizes has the smaller total, so that values near
/// one keep full relative precision.
pub fn expected_stopping_sets_log(n: u64, k: usize, m: u64, d: usize, l: u64) -> Result<f64> {
    if l > n {
        return Err(Error::param(format!("need l <= n, got l = {l}, n = {n}")));
    }
    if k as u64 > n || k < 2 {
        return Err(Error::param(format!("need 2 <= k <= n, got k = {k}")));
    }
    if d < 1 {
        return Err(Error::param("need d >= 1"));
    }
    let total = ln_choose(n, k as u64);
    let term = |s: usize| (ln_choose(l, s as u64) + ln_choose(n - l, (k - s) as u64) - total).exp();
    let forbidden: NeumaierSum = (1..d.min(k + 1)).map(term).collect();
    let allowed: NeumaierSum = std::iter::once(0).chain(d..=k).map(term).collect();
    let per_edge = if forbidden.value() < 0.5 {
        (-forbidden.value()).ln_1p()
    } else {
        allowed.value().ln()
    };
    let ln_per_edge = if m == 0 { 0.0 } else { m as f64 * per_edge };
    Ok(ln_choose(n, l) + ln_per_edge)
}

/// `h(δ) + γ ln(1 - kδ(1-δ)^{k-1})`: exponential rate of `E[S(δn)]` for
/// 2-stopping sets with `m = γn`.
pub fn linear_ss_rate(k: usize, gamma: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("need 0 < delta < 1, got {delta}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::param(format!("need gamma > 0, got {gamma}")));
    }
    let hit = k as f64 * delta * (1.0 - delta).powi(k as i32 - 1);
    Ok(binary_entropy(delta) + gamma * (-hit).ln_1p())
}

/// Smallest `γ` with `linear_ss_rate(k, γ, δ) <= -1` on all of
/// `[α, 1-α]`, found by bisection on `γ`.
pub fn gamma_alpha(k: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::param(format!("need 0 < alpha < 1/2, got {alpha}")));
    }
    let grid = solve::linspace(alpha, 1.0 - alpha, 2001);
    let worst = |gamma: f64| -> f64 {
        let f = |d: f64| linear_ss_rate(k, gamma, d).unwrap_or(f64::INFINITY);
        solve::grid_max(f, &grid, 1e-12).1
    };
    let mut hi = 1.0;
    while worst(hi) > -1.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Solver {
                msg: "gamma_alpha bracket search diverged".into(),
                residual: worst(hi) + 1.0,
                iterations: 0,
            });
        }
    }
    let (g, _) = solve::bisect(|g| worst(g) + 1.0, 1e-12, hi, 1e-12)?;
    Ok(g)
}

/// `δ_μ = 1 - (μk)^{-1/(k-1)}`; defined for `μ >= 1/k`.
pub fn delta_mu(k: usize, mu: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::param("need k >= 2"));
    }
    if !(mu * k as f64 >= 1.0) {
        return Err(Error::param(format!("need mu >= 1/k, got {mu}")));
    }
    Ok(1.0 - (mu * k as f64).powf(-1.0 / (k as f64 - 1.0)))
}

/// Polynomial decay exponent `1 - μk(1-δ)^{k-1}` of the expected number of
/// small stopping sets, together with `δ_μ`.
pub fn small_ss_bound(k: usize, mu: f64, delta: f64) -> Result<(f64, f64)> {
    if !(mu * k as f64 > 1.0) {
        return Err(Error::param(format!("need mu > 1/k, got {mu}")));
    }
    let dm = delta_mu(k, mu)?;
    if !(delta > 0.0 && delta < dm) {
        return Err(Error::param(format!("need 0 < delta < delta_mu = {dm}, got {delta}")));
    }
    Ok((1.0 - mu * k as f64 * (1.0 - delta).powi(k as i32 - 1), dm))
}

/// Root `ρ ∈ (0, 1)` of `ρ = exp(μk(ρ^{k-1} - 1))`, or `None` when
/// `μ <= 1/(k(k-1))`.
pub fn giant_component_rho(k: usize, mu: f64) -> Result<Option<f64>> {
    if k < 2 {
        return Err(Error::param("need k >= 2"));
    }
    let threshold = 1.0 / (k * (k - 1)) as f64;
    if !(mu > threshold) {
        return Ok(None);
    }
    Ok(solve::exp_fixed_point(mu * k as f64, k as f64 - 1.0, 1e-15)?.map(|(rho, _)| rho))
}

/// `k(k-1)μ / (1 - k(k-1)μ)` for `0 <= μ < 1/(k(k-1))`.
pub fn subcritical_rate_r2(k: usize, mu: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::param("need k >= 2"));
    }
    let x = (k * (k - 1)) as f64 * mu;
    if !(mu >= 0.0 && x < 1.0) {
        return Err(Error::param(format!("need 0 <= mu < 1/(k(k-1)), got {mu}")));
    }
    Ok(x / (1.0 - x))
}
