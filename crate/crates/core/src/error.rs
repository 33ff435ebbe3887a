use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("window error: {0}")]
    Window(String),
    #[error("capacity exceeded: {what} needs {needed}, limit is {limit}")]
    Capacity {
        what: &'static str,
        needed: usize,
        limit: usize,
    },
    #[error("step size underflow at t = {t}: h = {step} below minimum {min_step} (max |state| = {max_abs_state})")]
    Stiffness {
        t: f64,
        step: f64,
        min_step: f64,
        max_abs_state: f64,
    },
    #[error("state integrity violated at t = {t}: component {index} = {value}")]
    Integrity { t: f64, index: usize, value: f64 },
    #[error("stage {stage}: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn dims(expected: usize, actual: usize) -> Self {
        Error::Dimension { expected, actual }
    }

    /// Validation problems (bad input or configuration) as opposed to
    /// failures during a computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_) | Error::Argument(_) | Error::Dimension { .. } | Error::Window(_) => true,
            Error::Capacity { .. } | Error::Stiffness { .. } | Error::Integrity { .. } => false,
            Error::Stage { source, .. } => source.is_validation(),
        }
    }
}
