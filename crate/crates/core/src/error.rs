use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point set is empty")]
    EmptySet,

    #[error("{0} contains a non-finite value")]
    NonFinite(&'static str),

    #[error("weight entry {index} is {value}; weights must be strictly positive")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error(
        "point {index} is not strictly above the reference point \
         (coordinate {coordinate} shifted to {value})"
    )]
    NonPositiveShift {
        index: usize,
        coordinate: usize,
        value: f64,
    },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
