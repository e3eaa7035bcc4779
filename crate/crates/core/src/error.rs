use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("graph is disconnected; components: {components:?}")]
    Disconnected { components: Vec<Vec<usize>> },

    #[error("oracle returned a non-finite value at x = {x:?} along e = {e:?}")]
    NonFiniteOracle { x: Vec<f64>, e: Vec<f64> },

    #[error("solver aborted at outer iteration {k}, inner step {t}: {source}")]
    SolverAbort {
        k: usize,
        t: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite objective at step {step}: psi0 = {psi0}, iterate = {state:?}")]
    NonFiniteObjective {
        step: usize,
        psi0: f64,
        state: Vec<f64>,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Config { .. }
                | Error::Parse { .. }
                | Error::DimensionMismatch { .. }
                | Error::Disconnected { .. }
        )
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
