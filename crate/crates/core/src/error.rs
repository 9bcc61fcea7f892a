use thiserror::Error;

/// Errors raised by topology construction, oracle size guards, and estimator
/// preconditions. Each rejected input class gets its own variant so callers
/// (and the CLI) can name the offending field.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("torus side length {side} in dimension {dim} is below the minimum of 3")]
    SideTooSmall { dim: usize, side: u64 },

    #[error("dimension count {0} is invalid (must be >= 1)")]
    BadDimensionCount(u64),

    #[error("hypercube bit count {0} is out of range (must be in 1..=30)")]
    BadBitCount(u64),

    #[error("node count overflow: requested topology exceeds addressable size")]
    NodeCountOverflow,

    #[error("explicit graph is disconnected (node {0} unreachable from node 0)")]
    Disconnected(u64),

    #[error("explicit adjacency is asymmetric: {from} lists {to} but not vice versa")]
    Asymmetric { from: u64, to: u64 },

    #[error("explicit graph has a self-loop at node {0}")]
    SelfLoop(u64),

    #[error("explicit graph has a parallel edge {u} - {v}")]
    ParallelEdge { u: u64, v: u64 },

    #[error("node id {id} out of range for graph with {nodes} nodes")]
    NodeOutOfRange { id: u64, nodes: u64 },

    #[error("graph with {nodes} nodes exceeds the exact-computation guard of {guard}")]
    SizeGuard { nodes: u64, guard: u64 },

    #[error("operation requires a regular graph (degrees range from {min} to {max})")]
    IrregularGraph { min: u64, max: u64 },

    #[error("graph is bipartite; plain walks do not converge (enable the lazy walk to proceed)")]
    BipartiteGraph,

    #[error("eigensolver failed to converge")]
    EigensolveFailed,

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("index {index} out of range (maximum {max})")]
    RangeViolation { index: u64, max: u64 },

    #[error("all boosted estimates are absent; no collisions observed in any run")]
    AllEstimatesAbsent,

    #[error("malformed graph file at line {line}: {reason}")]
    GraphFileFormat { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
