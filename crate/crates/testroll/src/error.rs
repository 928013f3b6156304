use std::path::PathBuf;

use thiserror::Error;

pub type AppResult<T> = Result<T, AppError>;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Model(#[from] testroll_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

impl AppError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        AppError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// 2 for bad configuration or input, 3 for an exceeded resource budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config { .. } | AppError::Parse { .. } | AppError::Json(_) => 2,
            AppError::Model(testroll_core::Error::Resource(_)) => 3,
            AppError::Model(testroll_core::Error::Domain(_))
            | AppError::Model(testroll_core::Error::InsufficientData(_)) => 2,
            _ => 1,
        }
    }
}
