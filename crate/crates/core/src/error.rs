use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the domain of the operation (bad dimension, point on a singular set, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("expected at least {expected} samples, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("non-integrable singularity: {0}")]
    Singularity(String),

    /// A theorem's hypotheses failed on sampled points.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("regularity error: {0}")]
    Regularity(String),

    /// Mean curvature of the wrong sign where a real power of it is required.
    #[error("mean curvature sign convention: {0}")]
    Convention(String),

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("degenerate family: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: msg.into(),
        }
    }
}
