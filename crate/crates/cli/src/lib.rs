//! Config-driven experiments on top of `springchain`: parse a TOML
//! experiment definition, run it, and write comma-separated result tables.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

pub use config::{parse_config, parse_config_with, Experiment, ExperimentConfig};
pub use run::{run, Outcome, RunOptions};

pub const EXIT_NON_CONVERGENCE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Run(_) => EXIT_FAILURE,
        }
    }
}
