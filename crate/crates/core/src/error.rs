use std::io;
use std::path::PathBuf;

use crate::cube::PointId;

/// Errors produced by the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{axis} coordinate {value} out of bounds (limit {limit})")]
    OutOfBounds {
        axis: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("corrupt run file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },

    #[error("dimension mismatch: expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("failed to load point {id}: {source}")]
    PointLoad {
        id: PointId,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("need at least {needed} values, got {actual}")]
    TooFewValues { needed: usize, actual: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("parse error at {location}: {reason}")]
    Parse { location: String, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem or file contents rather than
    /// by caller-supplied arguments.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } | Error::CorruptFile { .. } => true,
            Error::PointLoad { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
