use auctions_core::Error as CoreError;
use thiserror::Error;

/// Failures surfaced by a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Precondition(_) => crate::EXIT_PRECONDITION,
            _ => crate::EXIT_USAGE,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Precondition(_) | CoreError::Unsupported(_) => CliError::Precondition(e.to_string()),
            CoreError::InvalidParameter(_) | CoreError::Parse(_) => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
