use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the simulation, evolution and reporting layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    /// An operation was called outside its contract (empty input, terminal state, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// A game could not be set up on the given arena.
    #[error("initialization error: {0}")]
    Init(String),
    #[error("i/o error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed data in {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
