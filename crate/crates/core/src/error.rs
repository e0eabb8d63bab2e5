use thiserror::Error;

/// Errors raised across geometry construction, assembly, solving and bound
/// evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("form degree {degree} out of range 0..={max}")]
    Degree { degree: usize, max: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("solver did not converge after {iterations} iterations (worst residual {worst_residual:.3e}, target {tolerance:.1e})")]
    Solver {
        iterations: usize,
        worst_residual: f64,
        tolerance: f64,
        residuals: Vec<f64>,
    },

    #[error("analytic spectrum unavailable for m = {m}, p = {p}")]
    OracleUnavailable { m: usize, p: usize },

    #[error("capability error: {0}")]
    Capability(String),

    #[error("geometry inconsistency: m|h|^2 - |H|^2 = {0:.3e} is negative")]
    GeometryInconsistency(f64),

    #[error("infeasible inputs: {0}")]
    Infeasible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("identity violation: {0}")]
    IdentityViolation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
