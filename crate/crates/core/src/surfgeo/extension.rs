//! Commutation checks for neighborhood extensions of conserved quantities.
//!
//! A gradient flow v written as phi grad(H1) x grad(H2) carries two frames
//! of surface coordinates: the flow direction and each rotated gradient
//! J_i x t. Rescaling both legs by 1/|v| makes them commute, so their
//! arclengths form local coordinates on the level surfaces of H_i. The
//! unscaled bracket instead keeps a transport term proportional to the
//! divergence of t.

use crate::diffcalc::{self, lie_bracket};
use crate::error::{xyz, Error, Result};
use crate::exprfield::{FieldDef, ScalarField, VectorField};
use crate::tol;
use crate::R3;

/// Closure-backed field; the Jacobian comes from the finite-difference
/// fallback of the trait.
struct FnField<F>(F);

impl<F: Fn(&R3) -> Result<R3>> VectorField for FnField<F> {
    fn value_at(&self, x: &R3) -> Result<R3> {
        (self.0)(x)
    }
}

/// Bracket residuals of the two coordinate legs at one point.
#[derive(Debug, Clone, Copy)]
pub struct BracketCheck {
    /// Norm of [v/|v|^2, (J_i x t)/|v|]; vanishes when w_i extend
    /// conserved quantities of the flow.
    pub scaled: [f64; 2],
    /// Norm of [t, J_i x t], kept for contrast: the 1/|v| rescaling is
    /// exactly what absorbs the transport terms.
    pub raw: [f64; 2],
    /// Factor tying the flow to the extension gradients at the base point,
    /// v = phi w1 x w2.
    pub phi: f64,
}

/// Measures how well the span of the flow direction and each rotated
/// extension gradient closes under the Lie bracket. `w1`, `w2` must extend
/// two independent conserved quantities of `field` to a neighborhood of
/// `x`; the Poisson legs are then J_1 = phi w1 and J_2 = -phi w2 with phi
/// recovered pointwise from v = phi w1 x w2.
pub fn extension_bracket_check(
    field: &FieldDef,
    w1: &dyn VectorField,
    w2: &dyn VectorField,
    x: &R3,
) -> Result<BracketCheck> {
    let data = |y: &R3| -> Result<(R3, f64, f64)> {
        let v = field.value(y)?;
        let speed = v.norm();
        if speed < tol::STAGNATION_SPEED {
            return Err(Error::Stagnation { at: xyz(y), speed });
        }
        let cross = w1.value_at(y)?.cross(&w2.value_at(y)?);
        let n2 = cross.norm_squared();
        if n2 < 1e-24 {
            return Err(Error::DependentGradients {
                at: xyz(y),
                cross_norm: n2.sqrt(),
            });
        }
        Ok((v, speed, v.dot(&cross) / n2))
    };
    let dref = &data;

    let flow_scaled = FnField(move |y: &R3| {
        let (v, speed, _) = dref(y)?;
        Ok(v / (speed * speed))
    });
    let flow_raw = FnField(move |y: &R3| {
        let (v, speed, _) = dref(y)?;
        Ok(v / speed)
    });
    let flow_scaled_jet = flow_scaled.vector_jet_at(x)?;
    let flow_raw_jet = flow_raw.vector_jet_at(x)?;

    let mut scaled = [0.0; 2];
    let mut raw = [0.0; 2];
    for (i, (leg, sign)) in [(w1, 1.0), (w2, -1.0)].into_iter().enumerate() {
        let rotated = move |y: &R3, rescale: bool| -> Result<R3> {
            let (v, speed, phi) = dref(y)?;
            let u = (leg.value_at(y)? * (sign * phi)).cross(&(v / speed));
            Ok(if rescale { u / speed } else { u })
        };
        let u_scaled = FnField(move |y: &R3| rotated(y, true));
        let u_raw = FnField(move |y: &R3| rotated(y, false));
        scaled[i] = lie_bracket(&flow_scaled_jet, &u_scaled.vector_jet_at(x)?).norm();
        raw[i] = lie_bracket(&flow_raw_jet, &u_raw.vector_jet_at(x)?).norm();
    }
    let (_, _, phi) = data(x)?;
    Ok(BracketCheck { scaled, raw, phi })
}

/// Decomposition of the unscaled bracket [t, grad(H) x t] at one point.
#[derive(Debug, Clone, Copy)]
pub struct TransportCheck {
    /// Coefficient of grad(H) x t in the bracket.
    pub lateral: f64,
    /// Its predicted value, minus the divergence of t.
    pub predicted_lateral: f64,
    /// Coefficient of t in the bracket.
    pub tangential: f64,
    /// Its predicted value, minus curl(t).grad(H).
    pub predicted_tangential: f64,
}

/// Checks that transporting a rotated conserved gradient along the flow
/// direction reproduces the divergence transport term. `h` must be
/// conserved by `field` near `x`.
pub fn transport_term_check(
    field: &FieldDef,
    h: &ScalarField,
    x: &R3,
) -> Result<TransportCheck> {
    let tangent_value = |y: &R3| -> Result<R3> {
        let v = field.value(y)?;
        let speed = v.norm();
        if speed < tol::STAGNATION_SPEED {
            return Err(Error::Stagnation { at: xyz(y), speed });
        }
        Ok(v / speed)
    };
    let tv = &tangent_value;
    let tangent = FnField(move |y: &R3| tv(y));
    let rotated = FnField(move |y: &R3| Ok(h.gradient(y)?.cross(&tv(y)?)));
    let bracket = lie_bracket(&tangent.vector_jet_at(x)?, &rotated.vector_jet_at(x)?);

    let ut = diffcalc::unit_tangent(&field.jet(x)?, x)?;
    let g = h.gradient(x)?;
    let w = g.cross(&ut.t);
    let wn2 = w.norm_squared();
    if wn2 < 1e-24 {
        return Err(Error::FlowAlignedGradient { at: xyz(x) });
    }
    Ok(TransportCheck {
        lateral: bracket.dot(&w) / wn2,
        predicted_lateral: -ut.div_t,
        tangential: bracket.dot(&ut.t),
        predicted_tangential: -ut.curl_t.dot(&g),
    })
}
