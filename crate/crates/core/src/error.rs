use thiserror::Error;

/// Errors raised by the core kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two operands disagree on shape; `field` names the offending input.
    #[error("shape mismatch in `{field}`: expected {expected}, got {actual}")]
    ShapeMismatch {
        field: &'static str,
        expected: String,
        actual: String,
    },

    /// A value of input `field` is out of its domain.
    #[error("invalid value in `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },

    #[error("degenerate batch: {0}")]
    DegenerateBatch(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("stale pooling index: built for {built} points, called with {actual}")]
    StaleIndex { built: usize, actual: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn mismatch(field: &'static str, expected: impl ToString, actual: impl ToString) -> Error {
    Error::ShapeMismatch {
        field,
        expected: expected.to_string(),
        actual: actual.to_string(),
    }
}

pub(crate) fn bad_field(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidField { field, reason: reason.into() }
}
