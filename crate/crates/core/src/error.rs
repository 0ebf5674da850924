//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate cube: {0}")]
    DegenerateCube(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("incompatible Young triple: {0}")]
    IncompatibleYoung(String),

    #[error("geometry does not fit domain: {0}")]
    GeometryMisfit(String),

    #[error("domination failure: {0}")]
    DominationFailure(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("experiment failure: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
