use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("no connected deployment found after {attempts} attempts (seed {seed})")]
    Disconnected { seed: u64, attempts: usize },

    #[error("topology graph is disconnected")]
    DisconnectedGraph,

    #[error("vertex {0} is unreachable")]
    Unreachable(usize),

    #[error("no cluster head elected after {attempts} draws (seed {seed})")]
    NoClusterHeads { seed: u64, attempts: usize },

    #[error("column {0} of the matrix is zero")]
    ZeroColumn(usize),

    #[error("input vector is zero")]
    ZeroVector,

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
