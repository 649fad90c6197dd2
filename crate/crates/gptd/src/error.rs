//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, fitting, and experiment orchestration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    /// Cholesky factorization failed; `leading_minor` is the 1-based index of
    /// the first non-positive-definite leading minor, as reported by the solver.
    #[error("matrix not positive definite (leading minor {leading_minor})")]
    NotPositiveDefinite { leading_minor: usize },

    #[error("predictive variance {value:.6e} is negative beyond tolerance {tolerance:.3e}")]
    NegativeVariance { value: f64, tolerance: f64 },

    #[error("eigendecomposition failed (LAPACK info {info})")]
    EigenFailed { info: i32 },

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("value iteration did not converge within {max_sweeps} sweeps (residual {residual:.3e})")]
    ValueIterationDiverged { max_sweeps: usize, residual: f64 },

    #[error("profiling guard exceeded: n = {n} states, limit {limit}")]
    GuardExceeded { n: usize, limit: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
