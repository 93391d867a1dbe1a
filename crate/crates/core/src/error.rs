use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema: {0}")]
    Schema(String),

    #[error("domain: {0}")]
    Domain(String),

    #[error("year {year} is missing age {age}")]
    Incomplete { year: i32, age: u32 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient data for {what}: need at least {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("lag {lag} out of range for series of length {len}")]
    LagRange { lag: usize, len: usize },

    #[error("rank: requested {requested} components but only {available} available")]
    Rank { requested: usize, available: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("error pool: {0}")]
    Pool(String),

    #[error("range: {0}")]
    Range(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable tag used by the CLI and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Schema(_) => "schema",
            Error::Domain(_) => "domain",
            Error::Incomplete { .. } => "incomplete",
            Error::Degenerate(_) => "degenerate",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::LagRange { .. } => "lag_range",
            Error::Rank { .. } => "rank",
            Error::Shape(_) => "shape",
            Error::Pool(_) => "pool",
            Error::Range(_) => "range",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
