//! Exact binomial and multinomial draws.
//!
//! Binomial variates come from `rand_distr::Binomial`, which is exact in
//! distribution: inversion for small `n·p` and the BTPE accept-reject scheme
//! otherwise. No normal approximation is ever used.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::math::NeumaierSum;

pub fn binomial<R: Rng + ?Sized>(rng: &mut R, trials: u64, p: f64) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    Binomial::new(trials, p)
        .expect("p checked to lie in (0, 1)")
        .sample(rng)
}

/// `Multinom(trials, probs)` by sequential conditional binomials.
///
/// `probs` must be nonnegative; it is normalised by its (compensated) sum.
pub fn multinomial<R: Rng + ?Sized>(rng: &mut R, trials: u64, probs: &[f64]) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    // suffix[i] = sum of probs[i..]
    let mut suffix = vec![0.0; probs.len() + 1];
    let mut acc = NeumaierSum::default();
    for i in (0..probs.len()).rev() {
        acc.add(probs[i]);
        suffix[i] = acc.value();
    }
    let mut left = trials;
    for i in 0..probs.len() {
        if left == 0 {
            break;
        }
        if suffix[i + 1] <= 0.0 {
            out[i] = left;
            left = 0;
            break;
        }
        let draw = binomial(rng, left, (probs[i] / suffix[i]).clamp(0.0, 1.0));
        out[i] = draw;
        left -= draw;
    }
    debug_assert_eq!(left, 0);
    out
}
