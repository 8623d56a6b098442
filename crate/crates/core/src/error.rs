//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex index {index} out of range for graph with {count} vertices")]
    VertexOutOfRange { index: usize, count: usize },

    #[error("negative edge weight on edge ({u}, {v})")]
    NegativeWeight { u: usize, v: usize },

    #[error("graph must contain at least one vertex")]
    EmptyGraph,

    #[error("graph has zero total weight; modularity is undefined")]
    ZeroTotalWeight,

    #[error("assignment has length {actual}, expected {expected}")]
    AssignmentLength { expected: usize, actual: usize },

    #[error("label {label} is not a valid community label for {count} vertices")]
    InvalidLabel { label: usize, count: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large for exhaustive enumeration: {vertices} vertices (limit {limit})")]
    InstanceTooLarge { vertices: usize, limit: usize },

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
