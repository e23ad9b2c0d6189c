use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("division by the zero polynomial")]
    ZeroDivisor,

    #[error("denominator vanishes at the evaluation point")]
    PoleAtPoint,

    #[error("singular system: no pivot in column {column}")]
    Singular { column: usize },

    #[error("series did not converge after {terms} terms (best tail bound {best_bound:e})")]
    NoConvergence { terms: usize, best_bound: f64 },

    #[error("{what} exceeds cap {cap} (requested {requested})")]
    CapExceeded {
        what: &'static str,
        cap: u64,
        requested: u64,
    },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
