use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite coordinate at point {point}, axis {axis}")]
    NonFinite { point: usize, axis: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cluster {cluster} is empty")]
    EmptyCluster { cluster: usize },

    #[error("cannot fill {k} clusters from {points} weighted points")]
    UnresolvableEmptyCluster { points: usize, k: usize },

    #[error("no partition level has at least {k} cells (largest has {largest})")]
    NoUsableLevel { k: usize, largest: usize },

    #[error("could not place {components} component means {separation} apart after {attempts} attempts")]
    InfeasibleMixture {
        components: usize,
        separation: f64,
        attempts: usize,
    },

    #[error("refined error is zero but the approximation error is {approx}")]
    DegenerateZeroError { approx: f64 },

    #[error("{}:{line}: column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
