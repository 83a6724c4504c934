use std::path::PathBuf;

use avsal_core::pipeline::PipelineError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A file exists but its contents cannot be used.
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] avsal_core::Error),
    #[error("{video}: {source}")]
    Pipeline {
        video: String,
        #[source]
        source: PipelineError,
    },
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        AppError::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// 1 for bad input, 2 when a pipeline stage fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Pipeline { .. } => 2,
            _ => 1,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
