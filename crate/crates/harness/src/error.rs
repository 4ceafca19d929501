use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Every violated constraint, one message each.
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("metadata: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] specden_core::Error),
    #[error("analysis: {0}")]
    Analysis(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for configuration problems, 3 for everything
    /// that goes wrong at run time.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
