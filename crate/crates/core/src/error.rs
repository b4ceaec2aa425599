//! Error types shared across the workbench modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension n = {n} rejected: bubble formulas require n >= 5")]
    DimensionTooSmall { n: usize },

    #[error("derivative order {order} exceeds the supported maximum 4")]
    OrderTooHigh { order: usize },

    #[error("scale must be positive, got {value}")]
    NonPositiveScale { value: f64 },

    #[error("cutoff radius must be positive, got {value}")]
    NonPositiveRadius { value: f64 },

    #[error("multi-bubble configuration violates {clause}")]
    DomainViolation { clause: String },

    #[error("convergence gate: decay hint {hint} <= n = {n}, integral diverges")]
    ConvergenceGate { hint: f64, n: usize },

    #[error("quadrature tolerance {tol:e} not met: error estimate {err:e} after {panels} panels")]
    ToleranceNotMet { tol: f64, err: f64, panels: usize },

    #[error("sphere moment degree {degree} exceeds the supported maximum 24")]
    MomentDegreeTooHigh { degree: usize },

    #[error("metric gate: |h| = {norm} >= 1 at the sample point")]
    MetricGate { norm: f64 },

    #[error("finite-difference step tuning failed: achieved error {achieved:e}, target {target:e}")]
    StepTuning { achieved: f64, target: f64 },

    #[error("field must be positive near the sample point, got {value}")]
    NonPositiveField { value: f64 },

    #[error("perturbation spec invalid: {reason}")]
    InvalidSpec { reason: String },

    #[error("linear solve failed: {reason}")]
    SingularSystem { reason: String },

    #[error("orthogonality precondition violated: {reason}")]
    OrthogonalityPrecondition { reason: String },

    #[error("{0}")]
    Unsupported(String),
}
