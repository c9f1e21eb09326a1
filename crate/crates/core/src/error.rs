//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by distance computations, certificates and solvers.
///
/// The variants are grouped so that the CLI can map each to a distinct exit
/// status (see [`Error::exit_code`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar or point lies outside the set where the operation is defined.
    #[error("domain error: {what} = {value} ({reason})")]
    Domain {
        what: &'static str,
        value: String,
        reason: String,
    },

    /// Dimensions of points, maps or domains disagree, or a constructor
    /// received malformed data.
    #[error("structural error: {0}")]
    Structural(String),

    /// The requested operation is not available for this kind of input.
    #[error("capability error: {0}")]
    Capability(String),

    /// A mathematical precondition is violated (containment,
    /// relative compactness, certificate bound).
    #[error("hypothesis error: {0}")]
    Hypothesis(String),

    /// The inner domain is not bounded for the ambient distance at double
    /// precision.
    #[error("boundedness error: diameter {diameter} exceeds cap {cap}")]
    Unbounded { diameter: f64, cap: f64 },

    /// A non-finite value appeared during evaluation.
    #[error("numeric error in {node}: {detail}")]
    Numeric { node: String, detail: String },

    /// Fixed-point iteration ran out of steps. Carries the step trace.
    #[error("no convergence after {iterations} iterations (last step {last_step:e})")]
    NonConvergence {
        iterations: usize,
        last_step: f64,
        trace: Vec<f64>,
    },

    /// Input specification could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: impl ToString, reason: impl Into<String>) -> Self {
        Error::Domain {
            what,
            value: value.to_string(),
            reason: reason.into(),
        }
    }

    /// Process exit status used by the `cmetric` binary.
    ///
    /// 2 parse/invalid input, 3 violated hypothesis, 4 numeric failure,
    /// 5 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Structural(_) | Error::Capability(_) | Error::Io(_) => 2,
            Error::Domain { .. } | Error::Hypothesis(_) | Error::Unbounded { .. } => 3,
            Error::Numeric { .. } => 4,
            Error::NonConvergence { .. } => 5,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
