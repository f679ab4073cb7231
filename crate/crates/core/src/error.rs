use std::path::PathBuf;

use crate::clip::ShapeViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid clip shape: {0}")]
    Shape(#[from] ShapeViolation),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("clip has no frames")]
    EmptyClip,

    #[error("frame sequence error in {dir}: {reason}")]
    Sequence { dir: PathBuf, reason: String },

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("malformed stream: {0}")]
    Stream(String),

    #[error("malformed recipe: {0}")]
    Recipe(String),

    #[error("malformed score sidecar: {0}")]
    Sidecar(String),

    #[error("relative gain undefined: all {0} crops have a near-zero input score")]
    UndefinedGain(usize),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
