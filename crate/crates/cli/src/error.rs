use std::process::ExitCode;

use ftn_core::FtnError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] FtnError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },

    #[error("cannot write metadata: {0}")]
    Metadata(#[from] toml::ser::Error),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// 0 ok, 1 other, 2 invalid configuration, 3 ill-conditioned,
    /// 4 numeric failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                FtnError::InvalidArgument(_) | FtnError::DimensionMismatch { .. } => 2,
                FtnError::IllConditioned { .. } => 3,
                FtnError::NumericFailure { .. } => 4,
                _ => 1,
            },
            CliError::Io { .. } | CliError::Metadata(_) => 1,
        }
    }
}

impl From<&CliError> for ExitCode {
    fn from(e: &CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}
