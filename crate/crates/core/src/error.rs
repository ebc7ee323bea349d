use thiserror::Error;

/// Errors raised by graph loading, partition validation and the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },

    #[error("line {line}: node id {id} out of range for {n} nodes")]
    IdOverflow { line: usize, id: u64, n: usize },

    #[error("node {node} out of range (graph has {n} nodes)")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("community slot {slot} out of range (partition has {k} slots)")]
    SlotOutOfRange { slot: usize, k: usize },

    #[error("node {node} already belongs to slot {slot}")]
    NoOpMove { node: usize, slot: usize },

    #[error("invalid resolution: {0}")]
    InvalidResolution(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("length mismatch: {left} vs {right} nodes")]
    LengthMismatch { left: usize, right: usize },

    #[error("graph has {n} nodes, the limit here is {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("edge density needs at least two nodes, got {0}")]
    TooFewNodes(usize),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
