use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The CLI maps each variant onto a process exit code, see [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("singular point: {0}")]
    Singular(String),

    #[error("region error: {0}")]
    Region(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("gradient of the boundary data is not invertible: {0}")]
    NonInvertible(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("root bracketing failed: {0}")]
    Root(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("backwards heat flow is ill-posed at the requested horizon: amplification {amplification:e} exceeds {limit:e}; safe horizon is t = {safe_horizon}")]
    IllPosed {
        amplification: f64,
        limit: f64,
        safe_horizon: f64,
    },

    #[error("non-finite integrand value {value} at node {node:?}")]
    Integration { node: Vec<f64>, value: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Exit code used by the command-line front end.
    ///
    /// 2 covers configuration and domain problems, 4 numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Unsupported(_)
            | Error::UnknownName { .. }
            | Error::Singular(_)
            | Error::Region(_)
            | Error::Precondition(_)
            | Error::NonInvertible(_)
            | Error::Io(_) => 2,
            Error::Overflow(_)
            | Error::Root(_)
            | Error::NoConvergence { .. }
            | Error::IllPosed { .. }
            | Error::Integration { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
