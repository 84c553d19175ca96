use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// Log map requested for a point in the cut locus of the base point.
    #[error("cut locus: {0}")]
    CutLocus(String),

    #[error("intrinsic mean did not converge after {iterations} iterations (residual {residual:e})")]
    MeanNonConvergence { iterations: usize, residual: f64 },

    #[error("intrinsic mean failed at iteration {iteration}: {source}")]
    MeanIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("level set blew up (non-finite value) at iteration {iteration}")]
    NumericalBlowup { iteration: usize },

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Malformed or unsupported file contents.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {0:?}, expected \"MVI1\"")]
    BadMagic([u8; 4]),

    #[error("unknown manifold tag {0}")]
    UnknownKind(u8),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("{extra} trailing bytes after payload")]
    TrailingData { extra: usize },

    #[error("pixel {index} (row {row}, col {col}) violates manifold invariants: {reason}")]
    InvalidPixel {
        index: usize,
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("unsupported image format: {0}")]
    Unsupported(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
