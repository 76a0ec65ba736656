use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot encode report: {0}")]
    Encode(String),
    #[error(transparent)]
    Core(#[from] arczero::Error),
}

impl CliError {
    /// 1 for certification failures, 2 for everything the user has to fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(arczero::Error::Uncertified { .. } | arczero::Error::Structural(_)) => 1,
            _ => 2,
        }
    }
}
