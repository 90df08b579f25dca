use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid size {size}: {reason}")]
    InvalidSize { size: usize, reason: &'static str },

    #[error("index {index} out of range for {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("non-finite adjacency entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("undirected graph has asymmetric weights at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },

    #[error("duplicate edge ({src}, {dst})")]
    DuplicateEdge { src: usize, dst: usize },

    #[error("scaling parameter must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error(
        "non-diagonalizable-by-unitary: normality residual {residual:e} exceeds {tolerance:e}"
    )]
    NonNormal { residual: f64, tolerance: f64 },

    #[error("eigenvalue {index} has modulus {modulus} outside the unit circle tolerance")]
    NotUnitModulus { index: usize, modulus: f64 },

    #[error("ad-bc must equal 1 (got {0})")]
    Determinant(f64),

    #[error("parameters (a, b) must not both be zero")]
    DegenerateParams,

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid operator store: {0}")]
    Store(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
