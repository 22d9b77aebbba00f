//! Crate-wide error type.

use thiserror::Error;

use crate::R3;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error in `{expr}` at {at:?}: {reason}")]
    Domain {
        expr: String,
        at: [f64; 3],
        reason: String,
    },

    #[error("symbolic derivative of `{function}` is not supported")]
    UnsupportedDerivative { function: String },

    #[error("stagnation point at {at:?} (speed {speed:.3e})")]
    Stagnation { at: [f64; 3], speed: f64 },

    #[error("frame case unstable near {at:?}: {detail}")]
    CaseInstability { at: [f64; 3], detail: String },

    #[error("no reference axis transversal to the tangent at {at:?}")]
    DegenerateAxis { at: [f64; 3] },

    #[error("Helmholtz residual {max_residual:.3e} exceeds tolerance {tol:.3e}")]
    HelmholtzViolation { max_residual: f64, tol: f64 },

    #[error("step size underflow at t = {t:.6e} (state {state:?})")]
    StepUnderflow { t: f64, state: Vec<f64> },

    #[error("Riccati tracks collided at s = {s:.6e}")]
    RiccatiCollision { s: f64 },

    #[error("gradient at {at:?} is aligned with the flow; no transverse angle")]
    FlowAlignedGradient { at: [f64; 3] },

    #[error("gradients at {at:?} are dependent (|g1 x g2| = {cross_norm:.3e})")]
    DependentGradients { at: [f64; 3], cross_norm: f64 },

    #[error("field is not a gradient (|curl| = {curl_norm:.3e} at {at:?})")]
    NonGradientField { at: [f64; 3], curl_norm: f64 },

    #[error("irregular surface point at {at:?} (|grad F| = {grad_norm:.3e})")]
    IrregularPoint { at: [f64; 3], grad_norm: f64 },

    #[error("surface projection did not converge near {at:?}")]
    ProjectionFailed { at: [f64; 3] },

    #[error("geodesic shooting failed from {from:?} to {to:?} (best miss {best_miss:.3e})")]
    ShootingFailed {
        from: [f64; 3],
        to: [f64; 3],
        best_miss: f64,
    },

    #[error("metric degenerate or non-positive at (u, v) = ({u:.6e}, {v:.6e})")]
    MetricDegenerate { u: f64, v: f64 },

    #[error("characteristic left the declared patch at t = {t:.6e}, (u, v) = ({u:.6e}, {v:.6e})")]
    DomainExit { t: f64, u: f64, v: f64 },

    #[error("unknown case `{name}`")]
    UnknownCase { name: String },

    #[error("invalid parameters for case `{case}`: {reason}")]
    InvalidParams { case: String, reason: String },

    #[error("{0}")]
    InvalidInput(String),
}

/// Error-message form of a point.
pub(crate) fn xyz(v: &R3) -> [f64; 3] {
    [v.x, v.y, v.z]
}
