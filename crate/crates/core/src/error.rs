use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration-model sampling failed after {attempts} attempts")]
    SamplingFailure { attempts: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("step cap {cap} exceeded; best deviation reached {deviation:e}")]
    CapExceeded { cap: u64, deviation: f64 },

    #[error("{n} vertices exceeds the exact-computation limit of {limit}")]
    SizeExceeded { n: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient data: {observed} conditioning events, need at least {required}")]
    InsufficientData { observed: u64, required: u64 },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
