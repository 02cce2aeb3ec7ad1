use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("forward cache does not match this model: {0}")]
    Cache(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    NumericDivergence { epoch: usize },

    #[error("resampling failed: {0}")]
    Resample(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("degenerate test: {0}")]
    DegenerateTest(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
