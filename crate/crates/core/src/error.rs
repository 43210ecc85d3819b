use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value or configuration violates an invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A config file could not be parsed or validated; `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },

    /// The Parameter injection method needs a carried world time.
    #[error("configuration error: parameter injection requires a carried parameter value")]
    MissingParameter,

    /// A ratio over zero samples was requested.
    #[error("undefined metric: {0} over an empty input")]
    UndefinedMetric(&'static str),

    #[error("record sent at {sent_at}s lies outside window [{start}, {end}]")]
    OutOfWindow { sent_at: f64, start: f64, end: f64 },

    #[error("batch tables have mismatched shapes: {0}")]
    Shape(String),

    #[error("incomplete trace: transaction {0} was never included in a block")]
    IncompleteTrace(u64),

    #[error("unknown preset `{0}` (expected `local` or `test`)")]
    UnknownPreset(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Process exit code: 1 for validation and usage problems, 2 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Csv { .. } => 2,
            _ => 1,
        }
    }
}
