use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid transmission function: {0}")]
    InvalidTransmission(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("network file line {line}: {msg}")]
    NetworkFormat { line: usize, msg: String },

    #[error("sample count must be at least 1")]
    ZeroSamples,

    #[error("node {node} is not a candidate of the coverage index")]
    UnknownCandidate { node: usize },

    #[error("invalid cost or budget: {0}")]
    InvalidCost(String),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("ground set of {size} elements exceeds the exhaustive-search bound of {bound}")]
    GroundSetTooLarge { size: usize, bound: usize },

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("topology is not a directed path: {0}")]
    NotAPath(String),

    #[error("coverage cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
