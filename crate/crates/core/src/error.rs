use thiserror::Error;

/// Errors reported by problem construction and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("value {value} at index {index} lies outside the link domain ({lo}, {hi})")]
    OutsideDomain { index: usize, value: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight matrix {index} is not symmetric positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { index: usize, min_eigenvalue: f64 },

    #[error("ill-conditioned system: pivot {pivot:e} at row {row}")]
    IllConditioned { row: usize, pivot: f64 },

    #[error("iteration budget exhausted after {iterations} iterations (gap {gap:e})")]
    BudgetExhausted { iterations: usize, gap: f64 },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Error {
    Error::ShapeMismatch {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
