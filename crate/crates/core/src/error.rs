use thiserror::Error;

/// Errors raised by the library. Variants map onto the CLI exit-code
/// contract: `Infeasible` is exit 3, everything else is a usage/input error.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("not a probability distribution: {0}")]
    Normalization(String),

    #[error("conditioning on a zero-probability event: {0}")]
    Conditioning(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("infeasible: {what} needs {needed} evaluations, cap is {cap}; use {fallback} instead")]
    Infeasible {
        what: String,
        needed: f64,
        cap: f64,
        fallback: String,
    },

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
