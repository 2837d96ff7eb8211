use std::io;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] mesocrypt_core::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 1 for domain and invariant failures, 2 for usage errors, 3 for I/O.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Clap(e) => e.exit_code() as u8,
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Invariant(_) => 1,
            CliError::Io(_) => 3,
            CliError::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => 3,
            CliError::Csv(_) => 1,
        })
    }
}
