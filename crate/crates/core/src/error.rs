use alloc::string::String;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input has zero magnitude")]
    ZeroInput,
    #[error("channel entry {index} has zero magnitude")]
    ZeroChannelEntry { index: usize },
    #[error("noise variance must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("outside the domain of validity: {0}")]
    Domain(&'static str),
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(&'static str),
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }
}
