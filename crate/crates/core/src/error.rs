use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid multiplicity range [{n_min}, {n_max}]: need 2 <= n_min <= n_max")]
    InvalidMultiplicity { n_min: usize, n_max: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("event {id} has {n} particles, need at least 2")]
    TooFewParticles { id: u64, n: usize },

    #[error("event {id} is not balanced: net momentum {net:e} GeV")]
    Unbalanced { id: u64, net: f64 },

    #[error("event has zero total momentum magnitude")]
    ZeroMomentum,

    #[error("axis has zero length")]
    ZeroAxis,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("problem too large for enumeration: {n} > {max}")]
    TooLarge { n: usize, max: usize },

    #[error("cone radius {0} too small: 1 - cos R vanishes")]
    DegenerateRadius(f64),

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("negative objective value {0}")]
    NegativeObjective(f64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
