//! Conservative confidence intervals for Markov chain Monte Carlo estimators
//! that do not rely on a central limit theorem.
//!
//! - [`chains`]: kernels, the built-in chain zoo, exact oracles.
//! - [`estimators`]: `e_n`, batch-means and repeated-runs variance, first
//!   absolute moment bounds.
//! - [`intervals`]: Chebyshev/Markov intervals, the CLT reference, and
//!   enlargement for non-stationary starts.
//! - [`bias`]: bias bounds from polynomial ergodicity and rate fitting.
//! - [`coverage`]: replicated experiments measuring empirical coverage.
//! - [`cli`]: the `mcci` command-line front end.

pub mod bias;
pub mod chains;
pub mod cli;
pub mod coverage;
pub mod error;
pub mod estimators;
pub mod intervals;
pub mod normal;
pub mod rng;
pub mod sum;

pub use error::{Error, Result};
