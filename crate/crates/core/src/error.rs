use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("null state")]
    NullState,
    #[error("incompatible states: {0}")]
    Incompatible(String),
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error("boost undefined for Galilean mode")]
    GalileanBoost,
    #[error("collapse onto null support")]
    NullSupport,
    #[error("requires space-like separation")]
    NotSpaceLike,
    #[error("wavefunction has no support on hyperboloid")]
    NoHyperboloidSupport,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("branches not distinguishable (|<L|R>| = {0:e})")]
    BranchesNotDistinguishable(f64),
    #[error("invalid foliation geometry: {0}")]
    InvalidFoliation(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("scale separation violated: {0}")]
    ScaleSeparation(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
