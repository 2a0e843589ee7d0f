use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("tone at {freq_hz} Hz is at or above the Nyquist frequency {nyquist_hz} Hz")]
    Aliasing { freq_hz: f64, nyquist_hz: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("csv row {row}: {message}")]
    CsvRow { row: usize, message: String },

    #[error("csv header is missing column `{0}`")]
    MissingColumn(String),

    #[error("unknown severity `{0}`")]
    UnknownSeverity(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
