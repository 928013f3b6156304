use alloc::string::String;

use crate::symmetric::TestDesign;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// The computation would exceed a configured size or runtime budget.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("optimizer did not converge after {evaluations} evaluations (best design {best:?})")]
    NonConvergence { evaluations: usize, best: TestDesign },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
