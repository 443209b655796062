use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum NswError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver failed to converge: residual {residual} after {iterations} iterations")]
    SolverFailure { residual: f64, iterations: usize },

    #[error("simplex grid too large: {points} points exceeds cap {cap}")]
    GridTooLarge { points: u64, cap: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("rate fit needs at least 3 positive data points, got {0}")]
    InsufficientData(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NswError>;
