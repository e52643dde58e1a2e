use std::path::PathBuf;

use nanosps_core::Error as CoreError;

/// Failures surfaced by the command line, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("{context}: {source}")]
    Numerics { context: String, source: CoreError },

    #[error("I/O error on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Parse { .. } => 2,
            Self::Numerics { .. } => 3,
            Self::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Self::Io { path: path.into(), message: err.to_string() }
    }

    /// Parameter and shape problems are the user's input; everything else is
    /// a numerical failure.
    pub fn core(context: impl Into<String>, source: CoreError) -> Self {
        let context = context.into();
        match source {
            CoreError::InvalidParameter { .. }
            | CoreError::InvalidLevel(_)
            | CoreError::ZeroModeLoss { .. }
            | CoreError::ZeroCoupling
            | CoreError::ZeroDrive
            | CoreError::TruncationTooSmall { .. } => Self::Config(format!("{context}: {source}")),
            source => Self::Numerics { context, source },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
