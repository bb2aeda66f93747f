//! Experiment harness around `rllq-core`: configuration files, CLI
//! overrides, a deterministic parallel replication runner and CSV/summary
//! artifacts.

pub mod config;
pub mod runner;

use thiserror::Error;

/// Harness failures, split by exit code: configuration problems exit with
/// status 2, runtime/numeric/IO problems with status 3.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl From<std::io::Error> for HarnessError {
    fn from(err: std::io::Error) -> Self {
        HarnessError::Runtime(err.to_string())
    }
}

impl From<rllq_core::Error> for HarnessError {
    fn from(err: rllq_core::Error) -> Self {
        HarnessError::Runtime(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
