use std::path::Path;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Errors that stop a run before any report is produced. All map to exit status 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("malformed config: {0}")]
    Config(String),

    #[error("{file}: {message}")]
    Instance { file: String, message: String },

    #[error("unknown instance `{0}`")]
    UnknownInstance(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] massgeom_core::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}
