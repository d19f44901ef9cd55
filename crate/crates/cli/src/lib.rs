//! Batch pipelines over `vrvol-core`: resampling, daily metrics, HAR
//! decomposition, regressions and simulation.

pub mod commands;
pub mod config;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Core(#[from] vrvol_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for usage or configuration problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Core(_) | CliError::Io(_) => 2,
        }
    }
}
