use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid exponent b = {0}, need b >= 1")]
    InvalidExponent(i64),
    #[error("point lies outside {0}")]
    DomainViolation(&'static str),
    #[error("malformed multi-index: {0}")]
    MalformedIndex(String),
    #[error("multi-index {0:?} is not admissible")]
    NotAdmissible(Vec<i64>),
    #[error("a kernel factor vanishes at this pair of points")]
    SingularPair,
    #[error("green function evaluated at its pole")]
    PoleCoincidence,
    #[error("non-finite integrand value at a sample point")]
    NonFiniteIntegrand,
    #[error("no sample falls inside the sublevel set")]
    EmptySublevel,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("divergent moment (exponent {0} <= -1)")]
    Divergent(String),
    #[error("sample grid of {requested} nodes exceeds the cap of {cap}")]
    ResourceLimit { requested: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
