//! Differential-geometric analysis of 3D vector fields built around the
//! Frenet-Serret frame of the flow.
//!
//! The crate is organized bottom-up:
//!
//! * [`exprfield`]: expression parsing and second-order forward-mode jets,
//! * [`diffcalc`]: gradient / divergence / curl and exact derivatives of the
//!   unit tangent field,
//! * [`frame`]: frame construction with case dispatch and the nine
//!   helicities of (t, n, b),
//! * [`trajectory`]: adaptive and fixed-step Runge-Kutta flow integration,
//! * [`poisson`]: Riccati integration along streamlines yielding a pair of
//!   compatible Poisson structures,
//! * [`surfgeo`]: fundamental forms, curvatures, geodesics and distance
//!   Hamiltonians on potential surfaces,
//! * [`cases`]: built-in verification systems (sphere, euler-like,
//!   aristotle).

pub mod cases;
pub mod diffcalc;
pub mod error;
pub mod exprfield;
pub mod frame;
pub mod poisson;
pub mod surfgeo;
pub mod tol;
pub mod trajectory;

/// Point or vector in R^3. Finite components are assumed throughout; any
/// operation that would produce NaN/Inf reports an error instead.
pub type R3 = nalgebra::Vector3<f64>;

/// 3x3 real matrix (Jacobians, Hessians).
pub type M3 = nalgebra::Matrix3<f64>;

/// Finite and strictly above `floor`; NaN and infinities fail.
pub(crate) fn finite_above(v: f64, floor: f64) -> bool {
    v.is_finite() && v > floor
}

pub use error::{Error, Result};
