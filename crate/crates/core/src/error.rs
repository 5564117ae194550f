use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate chart at ({q1}, {q2}): tangent vectors are (nearly) parallel")]
    DegenerateChart { q1: f64, q2: f64 },

    #[error("coordinate {value} outside domain [{min}, {max}] on axis {axis}")]
    OutOfDomain {
        axis: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("norm rescaling factor {0} is not positive (offset beyond the focal surface)")]
    NonPositiveFactor(f64),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("gauge function is not single-valued on periodic axis {axis} (jump {jump:e})")]
    PeriodicityViolation { axis: usize, jump: f64 },

    #[error("bad grid resolution: {0}")]
    BadResolution(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("assembled operator is not Hermitian under the area measure (defect {0:e})")]
    NonHermitianAssembly(f64),

    #[error("metric is not positive definite at node {0}")]
    NonPositiveMetric(usize),

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
