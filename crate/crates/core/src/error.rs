use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("join of an empty list of vectors")]
    EmptyJoin,

    /// A point, or a mapping output, left the sampling box of its space.
    #[error("{context}: coordinate {index} = {value} outside [{lower}, {upper}]")]
    OutOfDomain { context: String, index: usize, value: f64, lower: f64, upper: f64 },

    /// One entry per violated constraint.
    #[error("{}", .0.join("; "))]
    Constraint(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(vec![msg.into()])
    }
}
