use thiserror::Error;

/// Errors raised by the graph-variate analysis library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("missing statistics for node function {0}")]
    MissingStatistics(&'static str),
    #[error("signal too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("invalid band: {0}")]
    InvalidBand(String),
    #[error("range out of bounds: {0}")]
    OutOfRange(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate sample: zero variance")]
    DegenerateVariance,
}

pub type Result<T> = std::result::Result<T, Error>;
