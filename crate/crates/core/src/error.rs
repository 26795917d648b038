use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants are grouped into the categories the CLI maps onto exit codes,
/// see [`Error::category`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid world state: {0}")]
    InvalidState(String),

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("shape mismatch: expected dimension {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("table lookup failed: {0}")]
    Lookup(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("search too large: {0}")]
    TooLarge(String),

    #[error("planning budget exhausted before any backup completed")]
    Budget,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error family, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Parse,
    Numeric,
    Budget,
    Io,
    Input,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::TooLarge(_) => ErrorCategory::Config,
            Error::Parse { .. } => ErrorCategory::Parse,
            Error::Fit(_) | Error::Numeric(_) => ErrorCategory::Numeric,
            Error::Budget => ErrorCategory::Budget,
            Error::Io(_) => ErrorCategory::Io,
            Error::InvalidState(_)
            | Error::InvalidAction(_)
            | Error::Shape { .. }
            | Error::Lookup(_) => ErrorCategory::Input,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Parse => 3,
            ErrorCategory::Numeric => 4,
            ErrorCategory::Budget => 5,
            ErrorCategory::Io => 6,
            ErrorCategory::Input => 7,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
