use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at row {row}, column {column}: {message}")]
    Csv {
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid split: {0}")]
    Split(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("anchor file error: {0}")]
    Anchors(String),

    #[error("non-finite value produced in layer `{layer}`")]
    NonFinite { layer: String },

    #[error("training diverged at epoch {epoch}, step {step}: loss is not finite")]
    Diverged { epoch: usize, step: usize },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-parsable reason used as the prefix of CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Split(_) => "split",
            Error::Shape(_) => "shape",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Anchors(_) => "anchors",
            Error::NonFinite { .. } => "non-finite",
            Error::Diverged { .. } => "diverged",
            Error::Checkpoint(_) => "checkpoint",
            Error::Config(_) => "config",
            Error::Json(_) => "json",
        }
    }
}
