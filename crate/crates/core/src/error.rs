use std::path::PathBuf;

use thiserror::Error;

/// Broad failure classes; the CLI maps these onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Precondition,
    Io,
    Integrity,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("profile error: {0}")]
    Profile(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{message}")]
    Precondition { message: String, details: Vec<String> },

    #[error("data integrity violation: {message}")]
    Integrity { message: String, details: Vec<String> },

    /// A vote or decision refused by the selection engine; `reason` is a stable code.
    #[error("{message}")]
    Rejected { reason: &'static str, message: String },

    #[error("unknown reviewer {0:?}")]
    UnknownReviewer(String),

    #[error("revision conflict: expected {expected}, current is {current}")]
    StaleRevision { expected: u64, current: u64 },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Error::Precondition {
            message: message.into(),
            details: Vec::new(),
        }
    }

    pub fn precondition_with(message: impl Into<String>, details: Vec<String>) -> Self {
        Error::Precondition {
            message: message.into(),
            details,
        }
    }

    pub fn integrity(message: impl Into<String>, details: Vec<String>) -> Self {
        Error::Integrity {
            message: message.into(),
            details,
        }
    }

    pub fn rejected(reason: &'static str, message: impl Into<String>) -> Self {
        Error::Rejected {
            reason,
            message: message.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. } => ErrorClass::Io,
            Error::Parse { .. } | Error::Integrity { .. } | Error::Json(_) | Error::Csv(_) => {
                ErrorClass::Integrity
            }
            Error::Profile(_)
            | Error::InvalidInput(_)
            | Error::Precondition { .. }
            | Error::Rejected { .. }
            | Error::UnknownReviewer(_)
            | Error::StaleRevision { .. } => ErrorClass::Precondition,
        }
    }

    /// Stable snake_case code used in machine-readable error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Profile(_) => "profile",
            Error::InvalidInput(_) => "invalid_input",
            Error::Precondition { .. } => "precondition",
            Error::Integrity { .. } => "integrity",
            Error::Rejected { reason, .. } => reason,
            Error::UnknownReviewer(_) => "unknown_reviewer",
            Error::StaleRevision { .. } => "stale_revision",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub fn details(&self) -> &[String] {
        match self {
            Error::Precondition { details, .. } | Error::Integrity { details, .. } => details,
            _ => &[],
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
