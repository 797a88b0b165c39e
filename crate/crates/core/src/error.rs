use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape {rows}x{cols}: {reason}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        reason: String,
    },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("SVD did not converge after {sweeps} sweeps")]
    IterationFailure { sweeps: usize },

    #[error("basis is not orthonormal (Gram deviation {deviation:e})")]
    InvalidBasis { deviation: f64 },

    #[error("block {block} has no mass in the top-k subspace")]
    ZeroBlock { block: usize },

    #[error("matrix is zero")]
    ZeroMatrix,

    #[error("sampled rows are all zero; leverage probabilities are undefined")]
    DegenerateR,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid distribution: {0}")]
    DistributionInvalid(String),

    #[error("cannot draw {requested} distinct blocks, only {available} have positive probability")]
    NotEnoughBlocks { requested: usize, available: usize },

    #[error("unknown {kind} index {index} (limit {limit})")]
    UnknownIndex {
        kind: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the numbers rather than by the request.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IterationFailure { .. }
                | Error::InvalidBasis { .. }
                | Error::ZeroBlock { .. }
                | Error::ZeroMatrix
                | Error::DegenerateR
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
