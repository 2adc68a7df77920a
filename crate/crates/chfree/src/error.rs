use std::path::PathBuf;

use thiserror::Error;

use crate::pipeline::CheckOutcome;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error("invalid configuration field `{field}`: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    pub fn field(field: &str, message: &str) -> Self {
        ConfigError::Field {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn core(field: &str, err: chfree_core::Error) -> Self {
        ConfigError::Field {
            field: field.into(),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl IoError {
    pub fn file(path: &std::path::Path, source: std::io::Error) -> Self {
        IoError::File {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &std::path::Path, message: impl Into<String>) -> Self {
        IoError::Format {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

/// Failure of a run, mapped onto the process exit status.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver error: {0}")]
    Solver(#[from] chfree_core::Error),
    #[error("verification failed: {}", failed_checks(.0))]
    Verification(Vec<CheckOutcome>),
    #[error("i/o error: {0}")]
    Io(#[from] IoError),
}

fn failed_checks(outcomes: &[CheckOutcome]) -> String {
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.check).collect();
    failed.join(", ")
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Solver(_) => 3,
            RunError::Verification(_) => 4,
            RunError::Io(_) => 1,
        }
    }
}
