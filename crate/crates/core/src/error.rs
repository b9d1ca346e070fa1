use thiserror::Error;

/// Errors raised by library operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid subsystem index {index} for layout with {len} parties")]
    InvalidIndex { index: usize, len: usize },
    #[error("invalid state: {reason} (max violation {max_violation:.3e})")]
    InvalidState { reason: String, max_violation: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("generator is defective or ill-conditioned (cond {condition:.3e}); perturb the parameters slightly")]
    Defective { condition: f64 },
    #[error("no root found: {0}")]
    NoRoot(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
