use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CasimirError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CasimirError {
    #[error("invalid {what} = {value}: {reason}")]
    InvalidInput {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("frequency {zeta:e} rad/s outside tabulated range [{min:e}, {max:e}] and no extrapolation policy is enabled")]
    Extrapolation { zeta: f64, min: f64, max: f64 },

    #[error("quadrature did not converge on [{lo}, {hi}]: estimate {estimate:e}, error {error:e}")]
    QuadratureNonConvergence {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
    },

    #[error("Matsubara sum not converged after {terms} terms (cap {cap}); tail estimate {tail:e}")]
    Truncation { terms: usize, cap: usize, tail: f64 },

    #[error(
        "numerical derivative dominated by noise at T = {temperature} K (step-halving diverged)"
    )]
    NoisyDerivative { temperature: f64 },

    #[error("{0}")]
    Config(String),

    #[error("table {path}: line {line}: {reason}")]
    Table {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CasimirError {
    pub(crate) fn invalid(what: &'static str, value: f64, reason: &'static str) -> Self {
        CasimirError::InvalidInput {
            what,
            value,
            reason,
        }
    }

    /// Process exit code: 1 for configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CasimirError::InvalidInput { .. }
            | CasimirError::Config(_)
            | CasimirError::Table { .. }
            | CasimirError::Io { .. } => 1,
            CasimirError::Extrapolation { .. }
            | CasimirError::QuadratureNonConvergence { .. }
            | CasimirError::Truncation { .. }
            | CasimirError::NoisyDerivative { .. } => 2,
        }
    }
}
