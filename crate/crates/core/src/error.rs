use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the optimizer, network and pipeline layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-finite fitness {value} at position {position:?}")]
    NonFiniteFitness { value: f64, position: Vec<f64> },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("unknown identifier '{0}'")]
    UnknownId(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("corrupt artifact: {0}")]
    Corrupt(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
