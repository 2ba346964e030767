//! Command-line driver: configuration, the pipeline behind each subcommand,
//! and the artefacts it writes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod pipeline;

use std::fmt;
use std::process::ExitCode;

pub use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit code 2.
    Config(String),
    /// The numerics failed or a configured assertion did not hold: exit code 3.
    Numerical(String),
    /// Reading inputs or writing artefacts failed: exit code 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<multipeak::Error> for CliError {
    fn from(e: multipeak::Error) -> Self {
        match e {
            multipeak::Error::Io(io) => CliError::Io(io.to_string()),
            e if e.is_config() => CliError::Config(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
