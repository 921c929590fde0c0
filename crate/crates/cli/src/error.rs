use std::path::PathBuf;

use pqc_core::PqcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] PqcError),
}

impl CliError {
    /// 2 for bad input, 3 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Core(PqcError::Io(_)) => 3,
            _ => 2,
        }
    }
}
