use thiserror::Error;

/// Errors raised by cone, metric and solver operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cone is not strongly minihedral; least upper bounds are only available for the orthant")]
    NotStronglyMinihedral,

    #[error("pointedness not certified: constraint matrix has numerical rank {rank} < {dim}")]
    PointednessUncertified { rank: usize, dim: usize },

    #[error("no interior point found for the cone within the sampling budget")]
    EmptyInterior,

    #[error("seminorm index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("vector is not an interior point of the cone: {0}")]
    NotInterior(&'static str),

    #[error("bisection bracket not found within {0} doublings")]
    BracketNotFound(usize),

    #[error("seminorm family must be monotone")]
    MonotonicityRequired,

    #[error("operation requires the orthant order")]
    UnsupportedOrder,

    #[error("scalarization cone does not match the space's value cone")]
    ConeMismatch,

    #[error("point is not in the finite space")]
    UnknownPoint,

    #[error("invalid cone metric table: {0}")]
    InvalidTable(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("iteration diverged at step {0} (non-finite iterate)")]
    Divergence(usize),

    #[error("unknown suite `{name}`; available: {available}")]
    UnknownSuite { name: String, available: String },
}

pub type Result<T> = std::result::Result<T, Error>;
