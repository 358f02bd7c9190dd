use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("capacity exceeded: {what} needs {requested} entries, cap is {cap}")]
    CapacityExceeded {
        what: String,
        requested: u128,
        cap: usize,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: String,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("refusing to overwrite existing file {} (use --force)", .0.display())]
    RefusedOverwrite(PathBuf),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Prefixes the message with context, keeping the variant.
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        match self {
            Error::InvalidInput(m) => Error::InvalidInput(format!("{ctx}: {m}")),
            Error::NumericalFailure(m) => Error::NumericalFailure(format!("{ctx}: {m}")),
            Error::Unsupported(m) => Error::Unsupported(format!("{ctx}: {m}")),
            Error::Format(m) => Error::Format(format!("{ctx}: {m}")),
            Error::CapacityExceeded {
                what,
                requested,
                cap,
            } => Error::CapacityExceeded {
                what: format!("{ctx}: {what}"),
                requested,
                cap,
            },
            other => other,
        }
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::CapacityExceeded { .. } => "CapacityExceeded",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::Unsupported(_) => "Unsupported",
            Error::Parse { .. } => "ParseError",
            Error::Format(_) => "FormatError",
            Error::RefusedOverwrite(_) => "RefusedOverwrite",
            Error::Io { .. } => "IoError",
        }
    }
}
