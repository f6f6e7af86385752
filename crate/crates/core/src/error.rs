use thiserror::Error;

/// Errors produced by the solver layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A query point fell outside the interpolation domain.
    #[error("point {point} outside domain [{lo}, {hi}]")]
    OutOfDomain { point: f64, lo: f64, hi: f64 },

    /// The profile touched or crossed the axis (R <= 0), where the
    /// curvature equation is singular.
    #[error("singular state: {0}")]
    SingularState(String),

    /// The ODE denominator ru + sin(phi) became nonpositive.
    #[error("singularity at phi = {phi}: ru + sin(phi) = {delta}")]
    Singularity { phi: f64, delta: f64 },

    /// The assembled linear system could not be factorized.
    #[error("linear system is singular (n = {n})")]
    Factorization { n: usize },

    /// Newton or grid adaptation failed to converge.
    #[error("no convergence: {context} (residual {residual:.3e} after {iterations} iterations)")]
    NonConvergence {
        context: String,
        residual: f64,
        iterations: usize,
    },

    /// The outer truncation radius exceeded its hard cap.
    #[error("truncation failure: |T| did not stabilize by b = {b_cap} (last |dT| = {last_delta:.3e})")]
    TruncationFailure { b_cap: f64, last_delta: f64 },

    /// Samples expected on a Chebyshev grid were not on one.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The adaptive integrator exhausted its step budget.
    #[error("integrator failed: {0}")]
    Integrator(String),
}

pub type Result<T> = std::result::Result<T, Error>;
