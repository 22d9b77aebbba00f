//! Geometry of the potential surfaces threaded by a gradient field.
//!
//! For gradient systems the unit tangent of the flow is the surface normal
//! of every level set of the potential, so the frame legs (n, b) span the
//! tangent planes and the whole classical surface apparatus reduces to
//! helicity data of the frame.

mod extension;
mod geodesic;
mod metric;

pub use extension::{extension_bracket_check, transport_term_check, BracketCheck, TransportCheck};
pub use geodesic::{
    distance_hamiltonian_check, flow_project, geodesic_distance, geodesic_distance_with,
    geodesic_integrate, measured_geodesic_curvature, DistanceCheck, DistanceSample,
    GeodesicOptions, GeodesicSample, Surface,
};
pub use metric::{
    aristotle_patch, characteristic_flow, plane_cartesian_patch, sphere_patch,
    CharacteristicSample, FlowSystem, MetricPatch, TargetForm,
};

use crate::error::{xyz, Error, Result};
use crate::exprfield::FieldDef;
use crate::frame::{self, Helicities};
use crate::{diffcalc, R3};

/// Coefficients of the two fundamental forms in the orthonormal (n, b)
/// tangent basis, so the first form is the identity and every curvature is
/// an algebraic combination of the second.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

impl FundamentalForms {
    /// det II / det I; independent of the normal sign convention.
    pub fn gaussian(&self) -> f64 {
        let det1 = self.e * self.g - self.f * self.f;
        (self.l * self.n - self.m * self.m) / det1
    }

    pub fn mean(&self) -> f64 {
        let det1 = self.e * self.g - self.f * self.f;
        (self.l * self.g - 2.0 * self.m * self.f + self.n * self.e) / (2.0 * det1)
    }

    /// Second form along the unit tangent direction xi n + eta b.
    pub fn second_along(&self, xi: f64, eta: f64) -> f64 {
        self.l * xi * xi + 2.0 * self.m * xi * eta + self.n * eta * eta
    }

    /// The opposite normal orientation.
    pub fn flip(&self) -> FundamentalForms {
        FundamentalForms {
            l: -self.l,
            m: -self.m,
            n: -self.n,
            ..*self
        }
    }
}

/// Fundamental forms of the level set through x of the potential driving
/// `field`. The second form is stored as the tangent differential against
/// the surface displacement, II = dt . dX, whose coefficients reduce to
/// (L, M, N) = (H_bn, (H_b - H_n)/2, -H_nb); callers wanting the opposite
/// orientation use [`FundamentalForms::flip`].
///
/// The basis is the frame of [`frame::frame_at`], which is deterministic,
/// so (xi, eta) components from that frame match these coefficients.
pub fn fundamental_forms(field: &FieldDef, x: &R3) -> Result<FundamentalForms> {
    let jet = field.jet(x)?;
    let vj = jet.vector_jet();
    if !diffcalc::is_gradient(&vj, 1e-8) {
        return Err(Error::NonGradientField {
            at: xyz(x),
            curl_norm: diffcalc::curl(&vj).norm(),
        });
    }
    let ut = diffcalc::unit_tangent(&jet, x)?;
    let fr = frame::classify(&ut, x)?;
    let dn = ut.derivative_along(&fr.n);
    let db = ut.derivative_along(&fr.b);
    Ok(FundamentalForms {
        e: 1.0,
        f: 0.0,
        g: 1.0,
        l: fr.n.dot(&dn),
        m: 0.5 * (fr.n.dot(&db) + fr.b.dot(&dn)),
        n: fr.b.dot(&db),
    })
}

/// Transverse derivatives of a unit direction field xi n + eta b, supplied
/// by whoever owns the field; zero for a direction given at a single point.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectionRates {
    pub d_n_xi: f64,
    pub d_b_xi: f64,
    pub d_n_eta: f64,
    pub d_b_eta: f64,
}

/// Normal and geodesic curvature of a surface curve with tangent
/// T = xi n + eta b, in both sign conventions.
#[derive(Debug, Clone, Copy)]
pub struct Curvatures {
    /// Tangential component of dT/dsigma; on the unit sphere this is -1.
    pub normal: f64,
    /// The same with the leading coefficient sign flipped, as quoted in
    /// closed-form tables that orient the normal the other way.
    pub normal_variant: f64,
    /// dT/dsigma projected on t x T.
    pub geodesic: f64,
    /// Negated convention, projected on T x t.
    pub geodesic_variant: f64,
}

/// Curvatures from frame data alone. The direction rates feed only the
/// geodesic part; pass `DirectionRates::default()` when T is not a field.
pub fn curvatures(xi: f64, eta: f64, h: &Helicities, rates: DirectionRates) -> Curvatures {
    let normal = -xi * xi * h.h_bn + xi * eta * (h.h_n - h.h_b) + eta * eta * h.h_nb;
    let geodesic =
        rates.d_n_eta - rates.d_b_xi + xi * h.h_tn + eta * h.h_tb;
    Curvatures {
        normal,
        normal_variant: normal + 2.0 * xi * xi * h.h_bn,
        geodesic,
        geodesic_variant: -geodesic,
    }
}

/// Geodesic curvature of the direction field with slope mu = eta/xi carried
/// by a Riccati solution; the transverse slope derivatives come from the
/// caller. Vanishing output is the geodesic condition in slope form.
pub fn geodesic_curvature_mu(mu: f64, d_n_mu: f64, d_b_mu: f64, h: &Helicities) -> f64 {
    let w = 1.0 + mu * mu;
    (d_n_mu + mu * d_b_mu + w * (h.h_tn + mu * h.h_tb)) / w.powf(1.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfield::{parse_field, Params};
    use approx::assert_relative_eq;

    fn grad_of_radius() -> FieldDef {
        parse_field("x", "y", "z", &Params::new()).unwrap()
    }

    #[test]
    fn plane_has_vanishing_second_form() {
        let f = parse_field("0", "0", "1", &Params::new()).unwrap();
        let forms = fundamental_forms(&f, &R3::new(0.3, -0.2, 0.9)).unwrap();
        assert!(forms.l.abs() < 1e-12 && forms.m.abs() < 1e-12 && forms.n.abs() < 1e-12);
        assert_relative_eq!(forms.gaussian(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_sphere_is_umbilic_with_unit_curvature() {
        let f = grad_of_radius();
        let x = R3::new(0.6, 0.48, 0.64).normalize();
        let forms = fundamental_forms(&f, &x).unwrap();
        assert_relative_eq!(forms.l, 1.0, epsilon = 1e-9);
        assert_relative_eq!(forms.n, 1.0, epsilon = 1e-9);
        assert!(forms.m.abs() < 1e-9);
        assert_relative_eq!(forms.gaussian(), 1.0, epsilon = 1e-8);
        assert_relative_eq!(forms.flip().gaussian(), 1.0, epsilon = 1e-8);
        assert_relative_eq!(forms.flip().l, -1.0, epsilon = 1e-9);
    }

    #[test]
    fn second_form_matches_helicity_reduction() {
        // L = H_bn, 2M = H_b - H_n, N = -H_nb for any gradient field.
        let p = Params::new();
        let f = parse_field("y*z", "x*z", "x*y", &p).unwrap();
        let x = R3::new(0.8, 0.5, 0.3);
        let forms = fundamental_forms(&f, &x).unwrap();
        let bundle = crate::frame::frame_bundle(&f, &x).unwrap();
        assert_relative_eq!(forms.l, bundle.hel.h_bn, epsilon = 1e-8);
        assert_relative_eq!(2.0 * forms.m, bundle.hel.h_b - bundle.hel.h_n, epsilon = 1e-8);
        assert_relative_eq!(forms.n, -bundle.hel.h_nb, epsilon = 1e-8);
    }

    #[test]
    fn curl_carrying_field_is_rejected() {
        let f = parse_field("0-y", "x", "0", &Params::new()).unwrap();
        let err = fundamental_forms(&f, &R3::new(1.0, 0.4, 0.2)).unwrap_err();
        assert!(matches!(err, Error::NonGradientField { .. }));
    }

    #[test]
    fn sphere_directions_have_unit_normal_curvature() {
        let f = grad_of_radius();
        let x = R3::new(0.0, 0.0, 1.0);
        let bundle = crate::frame::frame_bundle(&f, &x).unwrap();
        for (xi, eta) in [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8)] {
            let c = curvatures(xi, eta, &bundle.hel, DirectionRates::default());
            assert_relative_eq!(c.normal, -1.0, epsilon = 1e-8);
            assert_relative_eq!(c.normal_variant, second_variant(xi, eta), epsilon = 1e-8);
        }
    }

    fn second_variant(xi: f64, eta: f64) -> f64 {
        // On the unit sphere H_bn = 1, H_nb = -1: variant = xi^2 - eta^2.
        xi * xi - eta * eta
    }

    #[test]
    fn latitude_circles_have_cotangent_geodesic_curvature() {
        // Eastward latitude field T = z_hat x X normalized; at polar angle
        // phi0 its geodesic curvature is cot(phi0), positive because the
        // circle bends toward the pole it encloses.
        let f = grad_of_radius();
        let phi0 = std::f64::consts::PI / 3.0;
        let x = R3::new(phi0.sin(), 0.0, phi0.cos());
        let comp = |y: &R3| -> (f64, f64) {
            let fry = crate::frame::frame_at(&f, y).unwrap();
            let w = R3::new(0.0, 0.0, 1.0).cross(y);
            let t = w / w.norm();
            (t.dot(&fry.n), t.dot(&fry.b))
        };
        let fr = crate::frame::frame_at(&f, &x).unwrap();
        let h = 1e-5;
        let along = |leg: R3| {
            let (xi_p, eta_p) = comp(&(x + h * leg));
            let (xi_m, eta_m) = comp(&(x - h * leg));
            ((xi_p - xi_m) / (2.0 * h), (eta_p - eta_m) / (2.0 * h))
        };
        let (d_n_xi, d_n_eta) = along(fr.n);
        let (d_b_xi, d_b_eta) = along(fr.b);
        let (xi, eta) = comp(&x);
        let bundle = crate::frame::frame_bundle(&f, &x).unwrap();
        let rates = DirectionRates {
            d_n_xi,
            d_b_xi,
            d_n_eta,
            d_b_eta,
        };
        let c = curvatures(xi, eta, &bundle.hel, rates);
        assert_relative_eq!(c.geodesic, 1.0 / phi0.tan(), epsilon = 1e-5);
        assert_relative_eq!(c.geodesic_variant, -1.0 / phi0.tan(), epsilon = 1e-5);
        // Slope form agrees where the slope is defined.
        let (d_n_mu, d_b_mu) = slope_rates(xi, eta, &rates);
        let kg = geodesic_curvature_mu(eta / xi, d_n_mu, d_b_mu, &bundle.hel);
        assert_relative_eq!(kg, 1.0 / phi0.tan(), epsilon = 1e-5);
    }

    fn slope_rates(xi: f64, eta: f64, r: &DirectionRates) -> (f64, f64) {
        // mu = eta/xi by the quotient rule.
        (
            (r.d_n_eta * xi - eta * r.d_n_xi) / (xi * xi),
            (r.d_b_eta * xi - eta * r.d_b_xi) / (xi * xi),
        )
    }
}
