use std::io;

use thiserror::Error;

/// Errors produced anywhere in the summarization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty graph")]
    EmptyGraph,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("node {node} out of range (graph has {n} nodes)")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("requested rank {k} exceeds matrix dimensions {rows}x{cols}")]
    RankTooLarge { k: usize, rows: usize, cols: usize },

    #[error("level {level}: rank {k} exceeds context width {width}")]
    LevelRank { level: usize, k: usize, width: usize },

    #[error("level {level} exceeds the maximum of {max}")]
    LevelOverflow { level: usize, max: usize },

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("histogram spec mismatch: summary uses {expected}, request uses {found}")]
    HistogramMismatch { expected: String, found: String },

    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::Corrupt(msg.into())
    }

    /// True for errors caused by the filesystem or stream layer.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
