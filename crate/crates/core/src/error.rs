use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("operator needs an interior node, got boundary node {0}")]
    BoundaryNode(String),
    #[error("stencil reaches outside the grid at {0}")]
    GhostReference(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
