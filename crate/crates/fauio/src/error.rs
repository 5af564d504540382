use std::path::PathBuf;

/// Errors of the command-line pipeline, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] fauio_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("missing artifacts: {}", .0.join(", "))]
    MissingArtifacts(Vec<String>),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        AppError::Parse { path: path.into(), message: message.into() }
    }

    /// 1 for infeasible designs and failed checks, 2 for input errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Infeasible(_) | AppError::CheckFailed(_) => 1,
            AppError::Core(fauio_core::Error::NoFeasiblePair) => 1,
            AppError::Core(fauio_core::Error::UioUnsolvable { .. }) => 1,
            _ => 2,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
