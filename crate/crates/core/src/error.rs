use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: label `{token}` is not +1 or -1")]
    Label { line: usize, token: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("measure {measure} is undefined: {reason}")]
    MeasureUndefined { measure: String, reason: String },

    #[error("label vector is not admissible for {measure}: {reason}")]
    Admissibility { measure: String, reason: String },

    #[error("exhaustive search over {size} items exceeds the bound of {limit}")]
    Capacity { size: usize, limit: usize },

    #[error("{path}: expected {expected} predictions, found {found}")]
    Alignment {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("training failed: {0}")]
    Training(String),

    #[error("model format: {0}")]
    Format(String),

    #[error("model cannot predict on new inputs: {0}")]
    NotDeployable(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn undefined(measure: impl ToString, reason: impl Into<String>) -> Self {
        Error::MeasureUndefined {
            measure: measure.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
