use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(#[from] stiefel_ekf::Error),

    #[error("{context}: {message}")]
    Runtime { context: String, message: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 config, 2 runtime or numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 1,
            SimError::Numerical(_) | SimError::Runtime { .. } => 2,
            SimError::Io { .. } => 3,
        }
    }
}

pub type SimResult<T> = std::result::Result<T, SimError>;
