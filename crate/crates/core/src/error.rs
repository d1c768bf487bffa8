use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: requested {requested} eigenvalues, only {available} available")]
    InsufficientData { requested: usize, available: usize },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("window error: {0}")]
    Window(String),

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("resolution error: {0}")]
    Resolution(String),
}

impl Error {
    /// True for errors caused by the inputs rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::InsufficientData { .. }
                | Error::Topology(_)
                | Error::Window(_)
                | Error::InvalidWitness(_)
                | Error::Assembly(_)
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
