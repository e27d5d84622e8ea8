use thiserror::Error;

use crate::periodic::SolverReport;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("conductivity tensor at node {node} is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    Ellipticity { node: usize, min_eigenvalue: f64 },

    #[error("conductivity tensor at boundary node {node} has off-diagonal entry {value:e}; boundary tensors must be diagonal")]
    BoundaryCompatibility { node: usize, value: f64 },

    #[error("{solver} did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("conservation of currents violated: |integral(I_i + I_e)| = {imbalance:e} exceeds {allowed:e}")]
    Conservation { imbalance: f64, allowed: f64 },

    #[error("operator is not admissible: {0}")]
    NotAdmissible(String),

    #[error("shift {0} lies in the spectrum")]
    SingularShift(String),

    #[error("contraction iteration diverged at outer iteration {}", report.outer_iterations)]
    Divergence { report: Box<SolverReport> },

    #[error("contraction iteration did not converge within {} outer iterations", report.outer_iterations)]
    MaxOuterExceeded { report: Box<SolverReport> },

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// The partial report carried by solver failures, if any.
    pub fn partial_report(&self) -> Option<&SolverReport> {
        match self {
            Error::Divergence { report } | Error::MaxOuterExceeded { report } => Some(report),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
