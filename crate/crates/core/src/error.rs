use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no usable edges after preprocessing")]
    EmptyGraph,

    #[error("edge ({0}, {1}) is not in the graph")]
    MissingEdge(usize, usize),

    #[error("node {0} is out of range for a graph with {1} nodes")]
    NodeOutOfRange(usize, usize),

    #[error("no difficulty score for edge ({0}, {1})")]
    MissingScore(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("metric undefined: {0}")]
    Metric(String),

    #[error("ego-tree depth {0} exceeds the supported limit of 2")]
    DepthLimit(usize),

    #[error("split '{0}' is empty")]
    EmptySplit(&'static str),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
