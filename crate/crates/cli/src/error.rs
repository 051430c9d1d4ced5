use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed TOML; the message carries the line and column.
    #[error("{0}")]
    Parse(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] qllg_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("plot: {0}")]
    Plot(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit code: 2 for numerical-monitor aborts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical_abort() => 2,
            _ => 1,
        }
    }
}
