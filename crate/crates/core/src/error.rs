use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed instance: {0}")]
    MalformedInstance(String),

    #[error("empty instance: {0}")]
    EmptyInstance(&'static str),

    #[error("graph has an isolated vertex {0}")]
    IsolatedVertex(usize),

    #[error("graph is not regular (degrees {min}..{max})")]
    NotRegular { min: usize, max: usize },

    #[error("predicate is constantly satisfied")]
    ConstantPredicate,

    #[error("matrix of order {0} exceeds the dense eigensolver limit")]
    TooLarge(usize),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("oracle range exceeded: n = {n}, limit {limit}")]
    OracleRange { n: usize, limit: usize },

    #[error("kind mismatch: {0}")]
    KindMismatch(String),

    #[error("sampler gave up after {attempts} attempts")]
    SamplerExhausted { attempts: usize },

    #[error("recursion depth {0} exceeds arity")]
    RecursionDepth(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
