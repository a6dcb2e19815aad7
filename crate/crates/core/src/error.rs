use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid settings or arguments: qubit counts, repetitions, learning rate, grid guards.
    #[error("configuration error: {0}")]
    Config(String),

    /// Inconsistent shapes: wire indices, parameter lengths, permutations, gate kinds.
    #[error("structural error: {0}")]
    Structure(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },

    #[error("feature {feature} is constant (min = max = {value}); cannot scale")]
    DegenerateScale { feature: usize, value: f64 },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
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
}
