use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid unfolding: {0}")]
    InvalidUnfolding(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),

    #[error(
        "dense Jacobian would have {entries} entries (cap {cap}); use the matrix-free operator"
    )]
    SizeCap { entries: usize, cap: usize },

    #[error("{0}")]
    Undefined(&'static str),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
