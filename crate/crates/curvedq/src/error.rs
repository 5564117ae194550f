use std::path::PathBuf;

use crate::expr::ExprError;

/// Problems with a run configuration.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    #[error("config key `{key}`: {message}")]
    Invalid { key: String, message: String },

    #[error("config key `{key}`: {source}")]
    Expression { key: String, source: ExprError },

    #[error("cannot read {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl ConfigError {
    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("task failed: {0}")]
    Task(#[from] curvedq_core::Error),

    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("validation failed: {0}")]
    ValidationFailed(String),
}

pub type CliResult<T> = Result<T, CliError>;
