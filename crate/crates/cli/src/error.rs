use std::borrow::Cow;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config `{field}`: {reason}")]
    Config { field: Cow<'static, str>, reason: String },
    #[error(transparent)]
    Core(#[from] collapsim_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("worker pool: {0}")]
    Workers(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(field: &'static str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: Cow::Borrowed(field),
            reason: reason.into(),
        }
    }

    pub fn config_owned(field: String, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: Cow::Owned(field),
            reason: reason.into(),
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
