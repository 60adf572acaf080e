//! Weighted SIR epidemics on Erdős–Rényi graphs.
//!
//! - [`weights`]: finite-support weight laws, per-vertex assignments, discretization.
//! - [`graph`]: `G(n, p)` sampling, cross-edge counts, sampled deviation bound.
//! - [`sim`]: exact event-driven simulation and replicate statistics.
//! - [`limit`]: the deterministic large-`n` limit curves.
//! - [`harness`]: experiment configuration, convergence studies and reports.

pub mod error;
pub mod graph;
pub mod harness;
pub mod limit;
pub mod seed;
pub mod sim;
pub mod weights;

pub use error::{Error, Result};
