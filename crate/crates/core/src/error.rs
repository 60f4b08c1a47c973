use thiserror::Error;

/// Failures reported by the toolkit. Numeric payloads are converted to `f64`
/// so the type does not depend on the scalar in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("phi is not positive at s = {s:e} (value {value:e})")]
    NonPositivePhi { s: f64, value: f64 },
    #[error("(s phi(s))' is not positive at s = {s:e} (value {value:e})")]
    NotIncreasing { s: f64, value: f64 },
    #[error("no bracket encloses the target {target:e} within the configured decades")]
    BracketFailure { target: f64 },
    #[error("tail of Lambda(t) did not settle: variation {variation:e} above tolerance {tolerance:e}")]
    NonConvergent { variation: f64, tolerance: f64 },
    #[error("adaptive quadrature on [{a:e}, {b:e}] stopped with error estimate {error:e}")]
    QuadratureFailure { a: f64, b: f64, error: f64 },
    #[error("truncation level k = {k} must exceed 1")]
    BadTruncation { k: f64 },
    #[error("coefficients are not elliptic: inf mu = {inf_mu:e}, inf (lambda + 2 mu) = {inf_lam2mu:e}")]
    EllipticityViolation { inf_mu: f64, inf_lam2mu: f64 },
    #[error("probe refinement did not stabilise: spread {spread:e}")]
    BudgetExhausted { spread: f64 },
    #[error("strictness constant must be nonnegative, got {kappa0:e}")]
    NotStrict { kappa0: f64 },
    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {residual:e}")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("integral of M(|f|/l) is infinite over the whole search range")]
    NotIntegrable,
    #[error("problem is not admissible for p = {p}: {reason}")]
    Inadmissible { p: f64, reason: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
