//! Vector calculus on evaluated jets.
//!
//! Everything here is algebra on values already produced by the expression
//! layer, so the only failure mode is a stagnation point. The unit tangent
//! bundle packs every first-order quantity of t = v/|v| that the frame
//! construction needs, including the gradient of the curl eigenvalue
//! H_t = t . (curl t), which requires the second derivatives of v.

use crate::error::xyz;
use crate::exprfield::{FieldJet, VectorJet};
use crate::{tol, Error, Result, M3, R3};

/// Divergence from a Jacobian.
pub fn divergence(j: &VectorJet) -> f64 {
    j.jacobian.trace()
}

/// Curl from a Jacobian.
pub fn curl(j: &VectorJet) -> R3 {
    curl_from_jacobian(&j.jacobian)
}

/// Curl read off a raw Jacobian matrix, rows indexed by component.
pub fn curl_from_jacobian(m: &M3) -> R3 {
    R3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    )
}

/// Jacobian of the curl, assembled from the component Hessians.
pub fn curl_jacobian(j: &FieldJet) -> M3 {
    let [h0, h1, h2] = &j.hessians;
    let mut k = M3::zeros();
    for col in 0..3 {
        k[(0, col)] = h2[(1, col)] - h1[(2, col)];
        k[(1, col)] = h0[(2, col)] - h2[(0, col)];
        k[(2, col)] = h1[(0, col)] - h0[(1, col)];
    }
    k
}

/// Commutator of two vector fields, `(u . grad) w - (w . grad) u`.
pub fn lie_bracket(u: &VectorJet, w: &VectorJet) -> R3 {
    w.jacobian * u.value - u.jacobian * w.value
}

/// Whether a Jacobian is symmetric enough to witness a gradient field.
pub fn is_gradient(j: &VectorJet, rel_tol: f64) -> bool {
    let scale = 1.0 + j.jacobian.norm();
    curl(j).norm() <= rel_tol * scale
}

/// First-order data of the unit tangent field t = v/|v| at one point,
/// together with the eigenvalue H_t of the curl along t and its exact
/// gradient.
#[derive(Debug, Clone, Copy)]
pub struct UnitTangent {
    pub speed: f64,
    pub velocity: R3,
    pub t: R3,
    /// Jacobian of t; directional derivatives are `jacobian * direction`.
    pub jacobian: M3,
    pub curl_t: R3,
    pub div_t: f64,
    /// H_t = t . (curl t) = v . (curl v) / |v|^2.
    pub h_t: f64,
    pub grad_h_t: R3,
    /// grad log |v|; for gradient fields curl t = t x grad log |v|.
    pub grad_log_speed: R3,
    pub curl_v: R3,
}

/// Build the unit tangent bundle from a second-order field jet.
pub fn unit_tangent(jet: &FieldJet, at: &R3) -> Result<UnitTangent> {
    let v = jet.value;
    let speed = v.norm();
    if speed < tol::STAGNATION_SPEED {
        return Err(Error::Stagnation {
            at: xyz(at),
            speed,
        });
    }
    let j = jet.jacobian;
    let s2 = speed * speed;
    let g = j.transpose() * v; // gradient of |v|^2 / 2
    let t = v / speed;
    let jacobian = j / speed - v * (g.transpose() / (s2 * speed));
    let w = curl(&jet.vector_jet());
    let curl_t = w / speed - g.cross(&v) / (s2 * speed);
    let div_t = j.trace() / speed - v.dot(&g) / (s2 * speed);
    let h_t = v.dot(&w) / s2;
    let k = curl_jacobian(jet);
    let grad_h_t =
        (j.transpose() * w + k.transpose() * v) / s2 - g * (2.0 * v.dot(&w) / (s2 * s2));
    Ok(UnitTangent {
        speed,
        velocity: v,
        t,
        jacobian,
        curl_t,
        div_t,
        h_t,
        grad_h_t,
        grad_log_speed: g / s2,
        curl_v: w,
    })
}

impl UnitTangent {
    /// Derivative of t along a direction.
    pub fn derivative_along(&self, dir: &R3) -> R3 {
        self.jacobian * dir
    }

    /// Derivative of log |v| along the flow direction.
    pub fn stretch_rate(&self) -> f64 {
        self.t.dot(&self.grad_log_speed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfield::{parse_field, Params, VectorField};

    fn no_params() -> Params {
        Params::new()
    }

    #[test]
    fn curl_and_divergence_closed_forms() {
        let f = parse_field("-y", "x", "0", &no_params()).unwrap();
        let j = f.jet(&R3::new(0.3, -0.8, 0.1)).unwrap();
        assert_eq!(curl(&j.vector_jet()), R3::new(0.0, 0.0, 2.0));
        assert_eq!(divergence(&j.vector_jet()), 0.0);

        let radial = parse_field("x", "y", "z", &no_params()).unwrap();
        let j = radial.jet(&R3::new(1.0, 2.0, -1.0)).unwrap();
        assert_eq!(divergence(&j.vector_jet()), 3.0);
        assert_eq!(curl(&j.vector_jet()), R3::zeros());
    }

    #[test]
    fn bracket_of_stretching_and_translation() {
        let u = parse_field("x", "0", "0", &no_params()).unwrap();
        let w = parse_field("1", "0", "0", &no_params()).unwrap();
        let x = R3::new(0.7, 0.0, 0.0);
        let bracket = lie_bracket(
            &u.vector_jet_at(&x).unwrap(),
            &w.vector_jet_at(&x).unwrap(),
        );
        assert_eq!(bracket, R3::new(-1.0, 0.0, 0.0));
    }

    #[test]
    fn unit_tangent_of_radial_field() {
        let f = parse_field("x", "y", "z", &no_params()).unwrap();
        let x = R3::new(1.0, 2.0, 2.0); // r = 3
        let ut = unit_tangent(&f.jet(&x).unwrap(), &x).unwrap();
        assert!((ut.t - x / 3.0).norm() < 1e-15);
        assert!((ut.div_t - 2.0 / 3.0).abs() < 1e-14);
        assert!(ut.curl_t.norm() < 1e-15);
        assert!(ut.h_t.abs() < 1e-15);
        assert!(ut.grad_h_t.norm() < 1e-14);
        // Jacobian of x/r is (I - t t^T)/r.
        let expect = (M3::identity() - ut.t * ut.t.transpose()) / 3.0;
        assert!((ut.jacobian - expect).norm() < 1e-14);
    }

    #[test]
    fn gradient_field_curl_identity() {
        // For v = grad F the curl of t satisfies curl t = t x grad log |v|.
        let f = parse_field("y*z", "x*z", "x*y", &no_params()).unwrap();
        for p in [
            R3::new(1.0, 2.0, 3.0),
            R3::new(0.4, -1.1, 0.9),
            R3::new(-0.6, 0.5, -1.4),
        ] {
            let ut = unit_tangent(&f.jet(&p).unwrap(), &p).unwrap();
            let rhs = ut.t.cross(&ut.grad_log_speed);
            assert!(
                (ut.curl_t - rhs).norm() < 1e-12,
                "identity residual {}",
                (ut.curl_t - rhs).norm()
            );
            assert!(ut.t.dot(&ut.curl_t).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalue_gradient_matches_closed_form() {
        // v = (0, -cos(x^2/2), sin(x^2/2)) is unit with curl v = x v, so
        // H_t = x and grad H_t = e_x.
        let f = parse_field("0", "-cos(x^2/2)", "sin(x^2/2)", &no_params()).unwrap();
        for p in [R3::new(0.7, 0.0, 0.0), R3::new(-1.3, 2.0, 0.5)] {
            let ut = unit_tangent(&f.jet(&p).unwrap(), &p).unwrap();
            assert!((ut.h_t - p.x).abs() < 1e-12);
            assert!((ut.grad_h_t - R3::new(1.0, 0.0, 0.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn curl_jacobian_matches_fd() {
        let f = parse_field("sin(y)*z", "x^2*z", "exp(x)*y", &no_params()).unwrap();
        let x = R3::new(0.4, -0.3, 0.8);
        let k = curl_jacobian(&f.jet(&x).unwrap());
        let h = 1e-5;
        for col in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[col] += h;
            xm[col] -= h;
            let cp = curl(&f.jet(&xp).unwrap().vector_jet());
            let cm = curl(&f.jet(&xm).unwrap().vector_jet());
            let fd = (cp - cm) / (2.0 * h);
            assert!((k.column(col) - fd).norm() < 1e-9);
        }
    }
}
