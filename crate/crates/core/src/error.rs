use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A realization or matrix would exceed the dense-storage limits.
    #[error("resource limit exceeded: {what} ({requested} > {limit})")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    /// Too few points for a statistic; carries whatever was computable.
    #[error("degenerate input: {reason}")]
    Degenerate {
        reason: String,
        partial: Option<f64>,
    },

    /// A quantity that is guaranteed in exact arithmetic came out wrong,
    /// e.g. a Gram matrix with a clearly negative eigenvalue.
    #[error("numerical invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid(msg: impl Into<String>) -> LabError {
    LabError::InvalidInput(msg.into())
}
