use std::process::ExitCode;

use thiserror::Error;

/// Input could not be read or parsed.
pub const EXIT_INPUT: u8 = 2;
/// Invalid flags or parameters.
pub const EXIT_CONFIG: u8 = 64;
/// A consistency check failed inside the pipeline.
pub const EXIT_INTERNAL: u8 = 70;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read input: {0}")]
    Input(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn to_exit(&self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }

    pub(crate) fn internal(e: impl std::fmt::Display) -> Self {
        CliError::Internal(e.to_string())
    }
}
