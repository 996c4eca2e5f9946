use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero direction")]
    ZeroDirection,

    #[error("degenerate direction")]
    DegenerateDirection,

    #[error("body {index} is not an interval")]
    NotInterval { index: usize },

    #[error("probabilities not separating, use continuation")]
    ProbabilitiesNotSeparating,

    #[error("oracle inconsistent: {0}")]
    OracleInconsistent(String),

    #[error("unresolvable crossing at direction {direction}: {branches} branches meet")]
    UnresolvableCrossing { direction: usize, branches: usize },

    #[error("gradient tie at direction {direction} (slope gap {gap:e}) - realizations may share a support point")]
    GradientTie { direction: usize, gap: f64 },

    #[error("body {index} does not contain the origin (support {value} < 0 at grid direction {direction})")]
    OriginNotContained { index: usize, direction: usize, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Failures of an algorithm on valid input, as opposed to rejected input.
    pub fn is_algorithmic(&self) -> bool {
        matches!(
            self,
            Error::ProbabilitiesNotSeparating
                | Error::OracleInconsistent(_)
                | Error::UnresolvableCrossing { .. }
                | Error::GradientTie { .. }
                | Error::DegenerateDirection
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
