use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("incompatible specification: {0}")]
    Incompatible(String),
    #[error("infinite intensity: {0}")]
    InfiniteIntensity(String),
    #[error("existence conditions not verified: {0}")]
    ExistenceFailed(String),
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
