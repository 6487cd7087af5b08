use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("unsupported distance order p = {0} (supported: 2, 4, 6, 8)")]
    UnsupportedOrder(u32),

    #[error("both vectors are zero")]
    ZeroVectors,

    #[error("vector is zero")]
    ZeroVector,

    #[error("invalid sparse vector: {0}")]
    InvalidSparse(String),

    #[error("index out of range: {what} = {index}, limit {limit}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("sketches were built with different projection specs")]
    SpecMismatch,

    #[error("estimator {estimator} requires the {expected} scheme")]
    SchemeMismatch {
        estimator: &'static str,
        expected: &'static str,
    },

    #[error("sketch is missing projected power {0}")]
    MissingPower(u32),

    #[error("sketch is missing margin q = {0}")]
    MissingMargin(u32),

    #[error("entry {index} is negative ({value}); nonnegative data required")]
    NegativeEntry { index: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown estimator id `{0}`")]
    UnknownEstimator(String),

    #[error("true distance is zero; normalized error is undefined")]
    ZeroDistance,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
