use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("Katětov condition violated on pair ({x}, {y}): {detail}")]
    KatetovViolation { x: usize, y: usize, detail: String },

    #[error(
        "nearest neighbour of the finalized query is not unique: {target} ties or loses to {rival}"
    )]
    AmbiguousNearest { target: usize, rival: usize },

    #[error("protocol violation: {0}")]
    Protocol(String),

    #[error("usage error for `{key}`: {message}")]
    Usage { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
