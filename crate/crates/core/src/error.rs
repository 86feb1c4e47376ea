use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the evaluators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter array violates one of its invariants.
    #[error("invalid parameters: {0}")]
    Parameter(String),

    /// Adaptive quadrature ran out of refinement budget.
    #[error("quadrature did not converge: best estimate {estimate:e}, error estimate {error:e} after {evaluations} evaluations")]
    Quadrature {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    /// The power series tail is larger than the requested tolerance.
    #[error("series truncated at N={n}: tail estimate {tail:e} exceeds tolerance {tol:e} at |w|={radius}")]
    Truncation {
        n: usize,
        tail: f64,
        tol: f64,
        radius: f64,
    },

    /// The continued fraction did not settle before the maximum depth.
    #[error("continued fraction did not converge by depth {depth}: partial value {partial}")]
    ContinuedFraction { depth: usize, partial: Complex64 },

    /// A probability went negative beyond the allowed slack.
    #[error("time stepping unstable at t={t}: probability {value:e} at state {state}; reduce dt")]
    Stability { t: f64, state: usize, value: f64 },

    /// The trajectory is too short to resolve a Laplace transform.
    #[error("trajectory horizon t_max={t_max} too short for p={p}; need t_max >= {required}")]
    Horizon { p: f64, t_max: f64, required: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
