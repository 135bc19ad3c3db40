//! Harness-level errors and their process exit codes.

use ftsreg_core::FtsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    /// More than the tolerated fraction of replications failed.
    #[error("run failure cap exceeded: {0}")]
    FailureCap(String),

    #[error(transparent)]
    Core(#[from] FtsError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl HarnessError {
    /// CLI exit code: 2 config, 3 data, 4 failure cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::FailureCap(_) => 4,
            HarnessError::Core(FtsError::InvalidConfig(_)) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
