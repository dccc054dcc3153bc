use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("objective returned a non-finite value at {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
