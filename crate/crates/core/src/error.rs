use std::fmt;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The caller supplied data that violates a precondition.
    #[error("invalid input: {0}")]
    Input(String),
    /// A numerical procedure failed or the model left its valid regime.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// A text file could not be parsed.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A per-compartment failure, tagged with the compartment name.
    #[error("compartment `{name}`: {source}")]
    Compartment {
        name: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numeric,
    Io,
}

impl Error {
    pub(crate) fn input(msg: impl fmt::Display) -> Self {
        Error::Input(msg.to_string())
    }

    pub(crate) fn numeric(msg: impl fmt::Display) -> Self {
        Error::Numeric(msg.to_string())
    }

    pub(crate) fn parse(line: usize, msg: impl fmt::Display) -> Self {
        Error::Parse {
            line,
            msg: msg.to_string(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Input(_) | Error::Parse { .. } => ErrorKind::Input,
            Error::Numeric(_) => ErrorKind::Numeric,
            Error::Compartment { source, .. } => source.kind(),
            Error::Io(_) => ErrorKind::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
