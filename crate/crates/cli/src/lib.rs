//! Command implementations behind the `pingpong` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod pipeline;

use thiserror::Error;

/// Every failure maps onto one process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("search exhausted: {0}")]
    Exhausted(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Certificate(_) => 1,
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Exhausted(_) => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
