use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("row {row} of P(u={action}) sums to {sum}, expected 1")]
    NonStochasticRow { action: usize, row: usize, sum: f64 },

    #[error("negative entry {value} at {location}")]
    NegativeEntry { location: String, value: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("induced chain has {recurrent_classes} recurrent classes, expected exactly 1")]
    NotIrreducible { recurrent_classes: usize },

    #[error("optimization problem infeasible: {0}")]
    Infeasible(String),

    #[error("optimization problem unbounded: {0}")]
    Unbounded(String),

    #[error("cost is infinite on every feasible occupancy measure: {0}")]
    InfiniteCost(String),

    #[error("solver did not converge after {iterations} iterations: {reason}")]
    NotConverged { iterations: usize, reason: String },

    #[error("entry {value} at {location} must be strictly positive")]
    NonPositiveEntry { location: String, value: f64 },

    #[error("matrix is not Schur stable (spectral radius {radius})")]
    NotSchur { radius: f64 },

    #[error("matrix {0} is not symmetric positive definite")]
    NotSpd(String),

    #[error("I - A - BK is singular")]
    SingularL,

    #[error("projection matrix B^T M B is singular")]
    SingularProjection,

    #[error("lambda must be strictly positive, got {0}")]
    LambdaNonpositive(f64),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
