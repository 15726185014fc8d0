use thiserror::Error;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The caller violated a documented precondition.
    Precondition,
    /// A numerical routine could not produce a valid answer.
    Numerical,
    /// Reading or writing a file failed.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("column {column} is numerically zero and cannot be normalized")]
    ZeroColumn { column: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("this construction requires complex scalars")]
    ComplexRequired,

    #[error("rank-deficient system: {0}")]
    Singular(String),

    #[error("columns of the known support are linearly dependent")]
    DependentSupport,

    #[error("projection annihilates column(s) {columns:?}")]
    DegenerateColumns { columns: Vec<usize> },

    #[error("measurement is not in the range of the dictionary (relative residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("unsupported coherence parameters: {0}")]
    UnsupportedParameters(String),

    #[error("combinatorial search too large: {count} candidate supports exceeds the limit {limit}")]
    GuardExceeded { count: u128, limit: u128 },

    #[error("no exact representation with at most {max_k} nonzero entries")]
    NotFound { max_k: usize },

    #[error("the vector is identically zero")]
    ZeroVector,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Singular(_)
            | Error::DependentSupport
            | Error::DegenerateColumns { .. }
            | Error::Infeasible { .. }
            | Error::NotFound { .. } => ErrorKind::Numerical,
            Error::Io(_) | Error::Csv(_) | Error::Image(_) => ErrorKind::Io,
            _ => ErrorKind::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
