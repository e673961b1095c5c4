//! Maximum-likelihood estimation for determinantal point processes.
//!
//! The crate covers kernel evaluation, the diagonal approximation with its
//! ratio certificate, the reduction from 3-SAT through 3-coloring to a
//! lifted DPP dataset, rank-3 projection of near-optimal kernels, and a
//! numerical MLE oracle used to check small instances.

pub mod coloring;
pub mod dataset;
pub mod diagonal;
pub mod error;
pub mod graph;
pub mod kernel;
pub mod linalg;
pub mod mle;
pub mod project;
pub mod reduction;
pub mod sat;

pub use dataset::{Dataset, EmpiricalStats};
pub use error::{Error, Result};
pub use graph::Graph;
pub use kernel::{EnsembleKernel, GramFactor, MarginalKernel, ValidationReport};

/// Probabilities at or below this are treated as zero by the likelihood.
pub const PROBABILITY_FLOOR: f64 = 1e-300;
