//! Support library for the `photonlim` binary: config-file parsing, CSV and
//! JSON serialization of results, and the self-check report.

pub mod checks;
pub mod config;
pub mod output;

use thiserror::Error;

/// Process-level failure categories with their exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    SizeCap(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::SizeCap(_) => 4,
            CliError::Numeric(_) => 5,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
