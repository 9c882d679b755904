use std::path::PathBuf;

use crate::graph::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid task graph: {0}")]
    InvalidGraph(ValidationReport),

    #[error("cycle detected through task `{0}`")]
    Cycle(String),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("no route between `{src}` and `{dst}`")]
    NoRoute { src: String, dst: String },

    #[error("contention violation on link `{link}`: [{start}, {finish}) overlaps an existing reservation")]
    Contention {
        link: String,
        start: f64,
        finish: f64,
    },

    #[error("generation error: {0}")]
    Generation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("scheduling failure: task `{task}` dequeued before predecessor `{predecessor}`")]
    SchedulingFailure { task: String, predecessor: String },

    #[error("metric undefined: {0}")]
    Metric(String),
}

impl Error {
    /// Wraps an I/O error with the path involved.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
