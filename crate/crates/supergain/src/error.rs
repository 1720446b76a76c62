//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by array construction, spectral decomposition and the
/// asymptotic solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Every retained mode of the lossy coupling matrix sits below the
    /// double-precision resolution floor.
    #[error(
        "ill-conditioned coupling matrix: smallest lossy eigenvalue {lambda_min_lossy:.3e} \
         is below the floor {floor:.1e}"
    )]
    IllConditioned { lambda_min_lossy: f64, floor: f64 },

    /// The bound gap 12 d ln(1 + 1/(2 d rho)) diverges for rho = 0.
    #[error("gap diverges as rho -> 0")]
    DivergentGap,

    /// Quadrature failed to reach the requested relative tolerance.
    #[error(
        "quadrature did not converge: last value {last:.6e}, \
         last refinement delta {delta:.3e}, final order {order}"
    )]
    QuadratureNoConvergence { last: f64, delta: f64, order: usize },

    /// A root bracket could not be established (should be unreachable for
    /// valid inputs).
    #[error("bracketing failure: {0}")]
    Bracket(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for input-validation failures, false for numerical failures.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::DivergentGap)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
