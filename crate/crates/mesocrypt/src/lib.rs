//! Experiment runner for `mesocrypt-core`: command-line configuration,
//! CSV formats, text reports and parallel sweeps.

pub mod config;
pub mod error;
pub mod formats;
pub mod report;
pub mod run;
pub mod sweep;

pub use config::{parse_config, Command, RunConfig};
pub use error::CliError;
pub use run::execute;
