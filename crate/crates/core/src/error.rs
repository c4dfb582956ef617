use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the admissible range of an operation.
    #[error("argument error: {0}")]
    Argument(String),
    /// A point lies outside the domain of a chart or map.
    #[error("domain error: {0}")]
    Domain(String),
    /// A Fermi foot point was requested at one of the poles.
    #[error("pole singularity: {0}")]
    PoleSingularity(String),
    /// A map evaluated to a point that is not on its declared target.
    #[error("target consistency error: {0}")]
    TargetConsistency(String),
    /// A projective-domain computation received a map that does not descend.
    #[error("equivariance error: {0}")]
    Equivariance(String),
    /// A diagnostic precondition (e.g. conformality at the probe) failed.
    #[error("precondition error: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
