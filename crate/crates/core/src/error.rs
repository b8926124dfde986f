use thiserror::Error;

/// Errors raised by distribution, mechanism, estimation and check routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A mechanism or check precondition does not hold for the given instance.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The requested quantity is not defined for this distribution family.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A serialized document could not be read.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
