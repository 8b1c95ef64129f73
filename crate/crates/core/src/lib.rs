//! Peeling on random k-uniform hypergraphs with superlinear edge counts.
//!
//! The crate is organised bottom-up:
//!
//! - [`hypergraph`]: the bipartite vertex/hyperedge structure and the
//!   `G_k(n, m, ℓ)` ensemble;
//! - [`peeling`]: the d-peeling engine, stopping-set checks and a brute-force
//!   oracle for the maximal stopping set;
//! - [`chains`]: count-level simulation of the exact, dominating and dominated
//!   degree-census Markov chains;
//! - [`analysis`]: threshold constant, rate function, saddle-point solvers,
//!   the exact moment-generating-function recursion and the stopping-set
//!   counting formulas;
//! - [`harness`]: seeded, reproducible Monte Carlo experiments and result
//!   tables.
//!
//! Randomness is always drawn from [`rng::Rng64`] (ChaCha8) keyed by a 64-bit
//! seed, so every experiment is bit-reproducible.

pub mod analysis;
pub mod chains;
mod error;
pub mod harness;
pub mod hypergraph;
pub mod math;
pub mod peeling;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
pub use hypergraph::{EnsembleParams, Hypergraph};
pub use peeling::{PeelConfig, PeelResult, PeelTrace, Schedule};
