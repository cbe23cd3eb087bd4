use std::path::PathBuf;

use gchlab_core::GchError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Schema or value violation; `key` is the dotted path of the offending entry.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{context} {}: {source}", path.display())]
    Io {
        context: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] GchError),
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(context: &'static str, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            context,
            path: path.into(),
            source,
        }
    }

    /// 4 for configuration and usage problems, 3 for solver failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 4,
            CliError::Io { .. } => 1,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &GchError) -> i32 {
    match e {
        GchError::InvalidGrid(_)
        | GchError::InvalidArgument { .. }
        | GchError::GridMismatch(_)
        | GchError::Unresolved { .. }
        | GchError::Degenerate(_) => 4,
        GchError::NonFinite { .. } | GchError::NumericalFailure { .. } => 3,
        GchError::RunFailed { source, .. } => core_exit_code(source),
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
