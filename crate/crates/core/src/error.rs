use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("lambda must be nonzero")]
    ZeroLambda,

    #[error("not a bundle transition: determinant {0} is not a unit in the Laurent ring")]
    NotATransition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("disk too large: {0}")]
    DiskTooLarge(String),

    #[error("inconsistent overlap between disks {0} and {1}: {2}")]
    InconsistentOverlap(usize, usize, String),
}
