//! CLI error type with the exit-code contract:
//! 0 success, 2 validation, 3 capacity, 4 acceptance-check failure, 5 I/O.

use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Validation(String),
    Capacity(String),
    Acceptance(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Acceptance(_) => 4,
            CliError::Io(_) => 5,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation: {msg}"),
            CliError::Capacity(msg) => write!(f, "capacity: {msg}"),
            CliError::Acceptance(msg) => write!(f, "acceptance: {msg}"),
            CliError::Io(msg) => write!(f, "io: {msg}"),
        }
    }
}

impl From<relsel_core::Error> for CliError {
    fn from(err: relsel_core::Error) -> Self {
        match err {
            relsel_core::Error::Capacity { .. } => CliError::Capacity(err.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Validation(format!("config parse error: {err}"))
    }
}

impl std::error::Error for CliError {}
