//! One-dimensional root finding and maximization.

use crate::{Error, Result};

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite signs.
/// Returns the midpoint once the bracket is narrower than `tol` and the
/// iteration count.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, usize)> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok((lo, 0));
    }
    if fhi == 0.0 {
        return Ok((hi, 0));
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::Solver {
            msg: format!("invalid bracket [{lo}, {hi}]"),
            residual: flo.abs().min(fhi.abs()),
            iterations: 0,
        });
    }
    let mut iterations = 0;
    while hi - lo > tol && iterations < 400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        iterations += 1;
        if fm == 0.0 {
            return Ok((mid, iterations));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), iterations))
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max, iterations)`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64, usize) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while hi - lo > tol && iterations < 500 {
        iterations += 1;
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    // Endpoint maxima are reached only in the limit; report the best seen.
    let best = [(x, fx), (x1, f1), (x2, f2)]
        .into_iter()
        .fold((x, fx), |acc, c| if c.1 > acc.1 { c } else { acc });
    (best.0, best.1, iterations)
}

/// Maximizes `f` over `grid` and then refines with golden-section search
/// between the neighbours of the best grid point.
pub fn grid_max(f: impl Fn(f64) -> f64, grid: &[f64], tol: f64) -> (f64, f64, usize) {
    let (best, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, f(x)))
        .fold((0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (x, fx, it) = golden_max(&f, lo, hi, tol);
    let fg = f(grid[best]);
    if fg > fx {
        (grid[best], fg, it)
    } else {
        (x, fx, it)
    }
}

/// `count` points from `lo` to `hi`, evenly spaced.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// `count` points from `lo` to `hi`, geometrically spaced; both positive.
pub fn geomspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Nontrivial root `ρ ∈ (0, 1)` of `ρ = exp(b(ρ^a - 1))`, which exists iff
/// `a·b > 1`. Solved in `u = log ρ` where the residual is concave.
pub fn exp_fixed_point(b: f64, a: f64, tol: f64) -> Result<Option<(f64, usize)>> {
    if a * b <= 1.0 {
        return Ok(None);
    }
    let h = |u: f64| u - b * (a * u).exp_m1();
    // h is concave with h(0) = 0 and h'(0) < 0: it peaks at u_m < 0 and
    // is negative at -(b + 1).
    let u_peak = -(a * b).ln() / a;
    let (u, iterations) = bisect(h, -(b + 1.0), u_peak, tol)?;
    Ok(Some((u.exp(), iterations)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let (x, _) = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 1e-14).is_err());
    }

    #[test]
    fn golden_on_parabola() {
        let (x, fx, _) = golden_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx <= 0.0 && fx > -1e-17);
    }

    #[test]
    fn grid_max_handles_endpoint() {
        let grid = linspace(0.0, 1.0, 11);
        let (x, _, _) = grid_max(|x| x, &grid, 1e-12);
        assert!((x - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_point() {
        assert!(exp_fixed_point(0.5, 1.0, 1e-15).unwrap().is_none());
        let (rho, _) = exp_fixed_point(2.0, 1.0, 1e-15).unwrap().unwrap();
        assert!((rho - (2.0 * (rho - 1.0)).exp()).abs() < 1e-14);
        assert!((rho - 0.203_187_869_979_979).abs() < 1e-12);
    }
}
