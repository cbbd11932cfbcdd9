//! Library half of the `compdist` command: configuration handling and the
//! pipeline stages, usable without going through the binary.

pub mod commands;
pub mod config;

pub use config::{PipelineConfig, SpaceKind};

/// Errors carry their exit code: invalid input or configuration exits 2,
/// everything else 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    /// Some of the work failed; outputs for the rest were written.
    #[error("{0}")]
    Partial(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            _ => 1,
        }
    }
}
