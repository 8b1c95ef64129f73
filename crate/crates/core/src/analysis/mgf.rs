//! Exact moment generating function of the dominating chain.
//!
//! With `Y(t) = (Ē(t) + t) / a`, one step of the dominating chain maps
//! `(Y, C̄_{a+1}, …, C̄_k)` to `(Y + R̄_{a+1}, C̄_{a+1} + R̄_{a+2}, …, C̄_k)`.
//! Conditioning on the previous state turns the exponent vector `λ` into
//!
//! ```text
//! λ_j ← λ_j + ln(1 - j/N + (j/N) e^{λ_{j-1}}),   j = a+1..=k,
//! ```
//!
//! where `N` is the live-vertex count of the step being integrated out.
//! After `t` such updates the expectation reduces to the multinomial MGF of
//! the initial census.

use serde::{Deserialize, Serialize};

use crate::chains::{p_init_all, ChainParams};
use crate::math::NeumaierSum;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgfQuery {
    pub n: u64,
    pub k: usize,
    pub r: usize,
    pub m: u64,
    pub ell: u64,
    pub t: u64,
    pub lambda: f64,
}

impl MgfQuery {
    fn chain_params(&self) -> ChainParams {
        ChainParams {
            n: self.n,
            k: self.k,
            r: self.r,
            m: self.m,
            ell: self.ell,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.chain_params();
        p.validate()?;
        if self.t >= self.n - self.ell - self.k as u64 {
            return Err(Error::Horizon {
                live: p.live(self.t),
                k: self.k,
            });
        }
        if !self.lambda.is_finite() {
            return Err(Error::param("lambda must be finite"));
        }
        Ok(())
    }
}

/// `ln E[exp(λ (Ē(t) + t) / a)]`.
pub fn log_mgf_exact_dominating(q: &MgfQuery) -> Result<f64> {
    q.validate()?;
    let k = q.k;
    let a = k - q.r + 1;
    let live0 = (q.n - q.ell) as f64;
    // lam[j] for j = a..=k; lam[a] stays λ throughout.
    let mut lam = vec![0.0; k + 1];
    lam[a] = q.lambda;
    for s in 1..=q.t {
        let live = live0 - (q.t - s) as f64;
        for j in (a + 1..=k).rev() {
            // Descending j reads the not-yet-updated lam[j - 1].
            lam[j] += ((j as f64 / live) * lam[j - 1].exp_m1()).ln_1p();
        }
    }
    let p = p_init_all(q.n, k, q.ell);
    let mut acc = NeumaierSum::default();
    for j in 1..=k {
        let theta = if j <= a { j as f64 * q.lambda / a as f64 } else { lam[j] };
        acc.add(p[j] * theta.exp_m1());
    }
    Ok(q.m as f64 * acc.value().ln_1p())
}

pub fn mgf_exact_dominating(q: &MgfQuery) -> Result<f64> {
    log_mgf_exact_dominating(q).map(f64::exp)
}

/// `ln E[exp(λ Ē(t))]`, via the shift `Ē(t) = a·Y(t) - t`.
pub fn log_mgf_dominating_e(q: &MgfQuery) -> Result<f64> {
    let a = (q.k - q.r + 1) as f64;
    let shifted = MgfQuery {
        lambda: q.lambda * a,
        ..*q
    };
    Ok(log_mgf_exact_dominating(&shifted)? - q.lambda * q.t as f64)
}

pub fn mgf_dominating_e(q: &MgfQuery) -> Result<f64> {
    log_mgf_dominating_e(q).map(f64::exp)
}
