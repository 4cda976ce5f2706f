use thiserror::Error;

/// Errors surfaced by solvers, generators, and the experiment harness.
#[derive(Debug, Error)]
pub enum SolverError {
    /// A point was passed whose length does not match the oracle dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A (sub)gradient of numerically zero norm was seen at a point whose
    /// function gap is not zero, so no model direction exists.
    #[error("zero generalized gradient at a non-optimal point")]
    ZeroGradient,

    /// A configuration value violates its documented constraint.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;
