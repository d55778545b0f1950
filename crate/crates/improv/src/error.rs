use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ImprovError>;

#[derive(Debug, Error)]
pub enum ImprovError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("config {path}: {msg}")]
    Config { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] improv_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl ImprovError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ImprovError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        ImprovError::Format { path: path.into(), msg: msg.into() }
    }
}
