use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument violated an operation's preconditions.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A covariance matrix is not in a form the toolkit handles.
    #[error("unsupported form: {0}")]
    UnsupportedForm(String),
    /// Input lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The scenario admits no meaningful answer (e.g. identical hypotheses).
    #[error("degenerate scenario: {0}")]
    DegenerateScenario(String),
    /// The geometry admits no meaningful answer (e.g. collinear stations).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    /// A sweep configuration violated its invariants.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for the degenerate-scenario / degenerate-geometry family.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateScenario(_) | Error::DegenerateGeometry(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
