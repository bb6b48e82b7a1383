//! Epoch-wise stochastic gradient descent ascent for saddle-point problems.
//!
//! The crate solves `min_{x in X} max_{y in Y} f(x, y)` from stochastic
//! subgradients in two regimes:
//!
//! * strongly-convex strongly-concave objectives ([`scsc`]), where epochs of
//!   projected descent ascent inside shrinking balls are restarted from their
//!   averages with halved step sizes, giving an `O(1/T)` duality gap;
//! * weakly-convex strongly-concave objectives ([`wcsc`]), where each epoch
//!   works on a proximally regularized surrogate and the output is a nearly
//!   stationary point of the primal function.
//!
//! [`problems`] provides testbeds with exact best-response oracles so that
//! [`metrics`] can evaluate duality gaps and near-stationarity exactly, and
//! [`baselines`] holds the averaged primal-dual SGD reference method.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod metrics;
pub mod problems;
pub mod scsc;
pub mod trace;
pub mod vecspace;
pub mod wcsc;

pub use error::{Error, Result};
pub use problems::{Curvature, NoiseKind, NoiseModel, SaddleProblem, TestbedSpec};
pub use trace::{Trace, TraceRow};
pub use vecspace::{ConvexSet, Point};

/// The run-level random generator: ChaCha with 8 rounds, seeded per run.
pub type RunRng = rand_chacha::ChaCha8Rng;

/// Generator for run `seed`.
pub fn run_rng(seed: u64) -> RunRng {
    use rand::SeedableRng;
    RunRng::seed_from_u64(seed)
}
