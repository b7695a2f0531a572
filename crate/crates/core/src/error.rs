use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} outside the domain of the weight ({domain})")]
    Domain { index: i64, domain: &'static str },
    #[error("unsupported norm family: {0}")]
    UnsupportedNorm(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("pole: symbol with negative powers evaluated at zero (coordinate {coordinate})")]
    Pole { coordinate: usize },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
