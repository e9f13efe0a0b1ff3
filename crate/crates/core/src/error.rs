use thiserror::Error;

/// Failures surfaced by the library. Per-point sweep failures are stored as
/// their display string rather than aborting a run.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not symmetric (max |A - A^T| = {0:e})")]
    NotSymmetric(f64),

    #[error("eigensolver failed to converge: {0}")]
    NoConvergence(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("{name} variance is negative beyond tolerance: {value:e}")]
    NegativeVariance { name: &'static str, value: f64 },

    #[error("golden data: {0}")]
    Golden(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
