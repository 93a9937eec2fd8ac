//! Library behind the `olg` binary: config parsing, the five subcommands,
//! and deterministic artifact emission. Kept as a library so integration
//! tests can drive commands directly.

pub mod commands;
pub mod config;
pub mod output;

/// Command failures, split by exit code: config problems exit 2, numeric
/// and i/o failures exit 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Numeric(#[from] olg_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}
