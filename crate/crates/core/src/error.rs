use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("risk level must satisfy 0 <= alpha < 1, got {0}")]
    InvalidRiskLevel(f64),

    #[error("projection received no samples")]
    EmptySamples,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("malformed mdp: {0}")]
    MalformedMdp(String),

    #[error("error atom {0:?} is not part of the table")]
    UnknownErrorAtom(Vec<f64>),

    #[error("error index {index} out of range ({count} atoms)")]
    ErrorIndexOutOfRange { index: usize, count: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("weighting function is zero everywhere")]
    DegenerateWeights,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("training diverged: {0}")]
    NonFiniteLoss(String),

    #[error("table format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
