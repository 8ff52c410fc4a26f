use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", config_message(.line, .message))]
    Config { line: Option<usize>, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] lsl_core::Error),

    #[error("{0}")]
    Usage(String),
}

fn config_message(line: &Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config line {l}: {message}"),
        None => format!("config: {message}"),
    }
}

impl CliError {
    /// Process exit status: 1 for harness and verdict failures, 2 for
    /// configuration, usage and I/O problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(lsl_core::Error::Harness(_)) | Self::Core(lsl_core::Error::CatalogIntegrity(_)) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
