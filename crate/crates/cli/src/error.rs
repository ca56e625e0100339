use std::fmt;

use graphvariate::Error as CoreError;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Unreadable or malformed input, unwritable output (exit 2).
    Io(String),
    /// Invalid configuration or arguments (exit 3).
    Config(String),
    /// The analysis itself failed on the data (exit 4).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            CliError::Config(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    pub fn io(context: impl fmt::Display, err: impl fmt::Display) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Parameter-shaped library errors are configuration problems; the rest
/// arise from the data.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidBand(_) | CoreError::InvalidParameter(_) | CoreError::OutOfRange(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
