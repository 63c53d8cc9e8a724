use std::path::PathBuf;

/// Everything that can go wrong in the library.
///
/// Variants split into two families: input validation (bad parameters,
/// malformed files, unsorted windows) and resource limits (enumeration or
/// memory caps). [`Error::is_validation`] tells them apart so front ends can
/// map them onto distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid sequence spec `{spec}`: {reason}")]
    InvalidSpec { spec: String, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("empty input")]
    EmptyInput,

    #[error("window must be strictly ascending (violated at index {index})")]
    NotAscending { index: usize },

    #[error("values must be exact integers for exact energy (index {index} holds {value})")]
    NonInteger { index: usize, value: f64 },

    #[error("nonpositive difference between positions {first} and {second}")]
    NonPositiveDifference { first: usize, second: usize },

    #[error("sets are not disjoint (shared element {0})")]
    NotDisjoint(i64),

    #[error("discretization collision: X[{first}] = X[{second}] = {value}")]
    Collision {
        first: usize,
        second: usize,
        value: i64,
    },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("memory cap exceeded: {what} needs about {bytes} bytes (cap {cap})")]
    MemoryCap {
        what: &'static str,
        bytes: u64,
        cap: u64,
    },

    #[error("enumeration bound {bound} exceeds cap {cap}")]
    EnumerationCap { bound: f64, cap: f64 },

    #[error("unknown battery `{0}`")]
    UnknownBattery(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by caller input rather than internal limits.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::MemoryCap { .. }
                | Error::EnumerationCap { .. }
                | Error::Io { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
