use thiserror::Error;

/// Errors raised by problem construction, the prox solvers and the optimizers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("point is outside the feasible set (coordinate {index})")]
    Infeasible { index: usize },

    #[error("dual iterate diverged at coordinate {index} (|theta| = {value})")]
    DualOverflow { index: usize, value: f64 },

    #[error("oracle failure after {calls} calls: {message}")]
    Oracle { calls: u64, message: String },

    #[error("problem does not expose an exact gradient")]
    MissingExactGradient,

    #[error("class index {index} out of range for {classes} classes")]
    ClassOutOfRange { index: usize, classes: usize },

    #[error("malformed classifier fixture: {0}")]
    Fixture(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
