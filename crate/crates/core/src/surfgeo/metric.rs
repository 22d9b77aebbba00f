//! Geodesic coordinates on explicit metric patches.
//!
//! A diagonal metric diag(g_uu, g_vv) over a coordinate rectangle can be
//! carried into a geodesic form where one coefficient is 1. The change of
//! coordinates is pinned down by two integrability conditions whose
//! characteristics are integral curves of small ODE systems in (u, v, theta);
//! along them the unit target coordinate advances linearly with arclength.

use crate::error::{Error, Result};
use crate::exprfield::ScalarField;
use crate::trajectory::ode::{integrate_adaptive, AdaptiveOptions, State};
use crate::R3;
use std::f64::consts::PI;
use std::ops::ControlFlow;

/// Which coefficient of the transformed metric is normalized to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetForm {
    /// ds^2 = dq^2 + G_pp dp^2
    UnitQ,
    /// ds^2 = G_qq dq^2 + dp^2
    UnitP,
}

/// Which integrability condition the characteristic flow follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowSystem {
    First,
    Second,
}

/// Diagonal metric over a (u, v) rectangle, with the declared geodesic
/// target. Expressions use `u`, `v` for the coordinates.
#[derive(Debug, Clone)]
pub struct MetricPatch {
    pub g_uu: ScalarField,
    pub g_vv: ScalarField,
    pub target: TargetForm,
    /// The non-unit coefficient of the target form, as a function of the
    /// target coordinates; carried for reporting, not used by the flow.
    pub target_coeff: ScalarField,
    /// u_min, u_max, v_min, v_max.
    pub domain: [f64; 4],
    /// Closed form of the unit target coordinate over (u, v) when known;
    /// enables the normalized advance-rate check.
    pub unit_coordinate: Option<ScalarField>,
}

impl MetricPatch {
    /// Validates positivity of both coefficients on an 11 x 11 grid over
    /// the domain rectangle.
    pub fn new(
        g_uu: ScalarField,
        g_vv: ScalarField,
        target: TargetForm,
        target_coeff: ScalarField,
        domain: [f64; 4],
        unit_coordinate: Option<ScalarField>,
    ) -> Result<Self> {
        let patch = MetricPatch {
            g_uu,
            g_vv,
            target,
            target_coeff,
            domain,
            unit_coordinate,
        };
        for i in 0..=10 {
            for j in 0..=10 {
                let u = domain[0] + (domain[1] - domain[0]) * i as f64 / 10.0;
                let v = domain[2] + (domain[3] - domain[2]) * j as f64 / 10.0;
                patch.coefficients(u, v)?;
            }
        }
        Ok(patch)
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        (self.domain[0]..=self.domain[1]).contains(&u)
            && (self.domain[2]..=self.domain[3]).contains(&v)
    }

    fn coefficients(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        let at = R3::new(u, v, 0.0);
        let guu = self.g_uu.value(&at)?;
        let gvv = self.g_vv.value(&at)?;
        if !crate::finite_above(guu, 1e-12) || !crate::finite_above(gvv, 1e-12) {
            return Err(Error::MetricDegenerate { u, v });
        }
        Ok((guu, gvv))
    }

    fn require_matching(&self, which: FlowSystem) -> Result<()> {
        let ok = matches!(
            (which, self.target),
            (FlowSystem::First, TargetForm::UnitQ) | (FlowSystem::Second, TargetForm::UnitP)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "flow system must match the patch target (first needs a unit-q target, \
                 second a unit-p target) or its coefficients do not close over (u, v)"
                    .into(),
            ))
        }
    }

    /// Arclength along the u-coordinate at fixed v, by adaptive quadrature
    /// of sqrt(g_uu). Runs backward when u1 < u0.
    pub fn u_arclength(&self, v: f64, u0: f64, u1: f64) -> Result<f64> {
        if u0 == u1 {
            return Ok(0.0);
        }
        let rhs = |u: f64, _y: &State<1>| -> Result<State<1>> {
            let (guu, _) = self.coefficients(u, v)?;
            Ok(State::<1>::new(guu.sqrt()))
        };
        let out = integrate_adaptive(
            rhs,
            u0,
            &State::<1>::new(0.0),
            u1,
            &AdaptiveOptions::default(),
            |_| ControlFlow::Continue(()),
        )?;
        Ok(out.y[0])
    }

    /// Advance rate of the unit target coordinate per unit arclength at a
    /// sampled state: -1 for the first system, +1 for the second, once the
    /// seed angle is consistent with the coordinate change. None without a
    /// closed-form coordinate.
    pub fn target_rate(
        &self,
        smp: &CharacteristicSample,
        which: FlowSystem,
    ) -> Result<Option<f64>> {
        let Some(map) = &self.unit_coordinate else {
            return Ok(None);
        };
        self.require_matching(which)?;
        let (guu, gvv) = self.coefficients(smp.u, smp.v)?;
        let (su, sv) = (guu.sqrt(), gvv.sqrt());
        let (sin, cos) = smp.theta.sin_cos();
        let (du, dv) = match which {
            FlowSystem::First => (-sv * cos, su * sin),
            FlowSystem::Second => (sv * sin, su * cos),
        };
        let g = map.jet(&R3::new(smp.u, smp.v, 0.0))?.grad;
        Ok(Some((g.x * du + g.y * dv) / (su * sv)))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CharacteristicSample {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub theta: f64,
    /// Arclength in the source coordinates.
    pub sigma: f64,
    /// Arclength in the target coordinates; equal to sigma along
    /// characteristics.
    pub rho: f64,
}

/// Integrate the characteristic system of the chosen integrability
/// condition from seed (u, v, theta), sampling on the lattice k * step plus
/// the endpoint.
///
/// First system: du/dt = -gamma_v cos(theta), dv/dt = gamma_u sin(theta),
/// dtheta/dt = (d_v gamma_u) cos(theta) + (d_u gamma_v) sin(theta).
/// Second system: du/dt = gamma_v sin(theta), dv/dt = gamma_u cos(theta),
/// dtheta/dt = (d_u gamma_v) cos(theta) - (d_v gamma_u) sin(theta).
/// With a matching target both gammas reduce to sqrt(g) and the system
/// closes over the patch; both arclengths grow at sqrt(g_uu g_vv).
pub fn characteristic_flow(
    patch: &MetricPatch,
    which: FlowSystem,
    seed: [f64; 3],
    t_max: f64,
    step: f64,
) -> Result<Vec<CharacteristicSample>> {
    patch.require_matching(which)?;
    if !crate::finite_above(t_max, 0.0) || !crate::finite_above(step, 0.0) {
        return Err(Error::InvalidInput(
            "characteristic span and sample step must be positive".into(),
        ));
    }
    if !patch.contains(seed[0], seed[1]) {
        return Err(Error::DomainExit {
            t: 0.0,
            u: seed[0],
            v: seed[1],
        });
    }

    let mut pending: Option<Error> = None;
    let rhs = |t: f64, y: &State<4>| -> Result<State<4>> {
        let (u, v, theta) = (y[0], y[1], y[2]);
        if !patch.contains(u, v) {
            return Err(Error::DomainExit { t, u, v });
        }
        let at = R3::new(u, v, 0.0);
        let juu = patch.g_uu.jet(&at)?;
        let jvv = patch.g_vv.jet(&at)?;
        if !crate::finite_above(juu.value, 1e-12) || !crate::finite_above(jvv.value, 1e-12) {
            return Err(Error::MetricDegenerate { u, v });
        }
        let su = juu.value.sqrt();
        let sv = jvv.value.sqrt();
        // d sqrt(g) = dg / (2 sqrt(g))
        let dv_su = juu.grad.y / (2.0 * su);
        let du_sv = jvv.grad.x / (2.0 * sv);
        let (sin, cos) = theta.sin_cos();
        let rates = match which {
            FlowSystem::First => [-sv * cos, su * sin, dv_su * cos + du_sv * sin],
            FlowSystem::Second => [sv * sin, su * cos, du_sv * cos - dv_su * sin],
        };
        Ok(State::<4>::from_column_slice(&[
            rates[0],
            rates[1],
            rates[2],
            su * sv,
        ]))
    };

    let y0 = State::<4>::from_column_slice(&[seed[0], seed[1], seed[2], 0.0]);
    let mut lattice: Vec<(f64, State<4>)> = Vec::new();
    let mut next = 0.0_f64;
    let out = integrate_adaptive(
        |t, y| match rhs(t, y) {
            Ok(r) => Ok(r),
            Err(e) => {
                pending = Some(e.clone());
                Err(e)
            }
        },
        0.0,
        &y0,
        t_max,
        &AdaptiveOptions::default(),
        |st| {
            while next <= st.t1 + 1e-14 {
                if st.contains(next) {
                    lattice.push((next, st.sample(next)));
                    next += step;
                } else {
                    break;
                }
            }
            ControlFlow::Continue(())
        },
    );
    match out {
        Ok(done) => {
            if lattice.last().map_or(true, |(t, _)| t_max - t > 1e-12) {
                lattice.push((done.t, done.y));
            }
        }
        Err(e) => return Err(pending.unwrap_or(e)),
    }
    Ok(lattice
        .into_iter()
        .map(|(t, y)| CharacteristicSample {
            t,
            u: y[0],
            v: y[1],
            theta: y[2],
            sigma: y[3],
            rho: y[3],
        })
        .collect())
}

/// Round sphere of unit radius in polar coordinates: u is the polar angle,
/// v the azimuth, and the metric is already geodesic about the pole.
pub fn sphere_patch() -> MetricPatch {
    let p = crate::exprfield::Params::new();
    MetricPatch::new(
        ScalarField::parse("1", &p).unwrap(),
        ScalarField::parse("sin(u)^2", &p).unwrap(),
        TargetForm::UnitQ,
        ScalarField::parse("sin(q)^2", &p).unwrap(),
        [0.05, PI - 0.05, -10.0, 10.0],
        Some(ScalarField::parse("u", &p).unwrap()),
    )
    .expect("round metric is positive away from the poles")
}

/// Euclidean plane in Cartesian (u, v) aimed at geodesic polar coordinates
/// about the origin.
pub fn plane_cartesian_patch() -> MetricPatch {
    let p = crate::exprfield::Params::new();
    MetricPatch::new(
        ScalarField::parse("1", &p).unwrap(),
        ScalarField::parse("1", &p).unwrap(),
        TargetForm::UnitQ,
        ScalarField::parse("q^2", &p).unwrap(),
        [-10.0, 10.0, -10.0, 10.0],
        Some(ScalarField::parse("sqrt(u^2+v^2)", &p).unwrap()),
    )
    .expect("identity metric is positive")
}

/// Orthogonal coordinates of one level surface of the three-body wedge
/// potential a ln(y-z) + b ln(x-z) + c ln(x-y) at level a+b+c. The rulings
/// are unit-speed straight lines, so the metric diag(g_uu(u), 1) is already
/// in unit-p geodesic form with G_qq = g_uu.
pub fn aristotle_patch(a: f64, b: f64, c: f64) -> Result<MetricPatch> {
    if ![a, b, c].iter().all(|w| w.is_finite()) {
        return Err(Error::InvalidParams {
            case: "aristotle".into(),
            reason: "weights must be finite".into(),
        });
    }
    let mut params = crate::exprfield::Params::new();
    params.insert("a".into(), a);
    params.insert("b".into(), b);
    params.insert("c".into(), c);
    // f(u) = exp(a+b+c) (u+1/2)^-b (u-1/2)^-c solves the level equation;
    // g_uu = (2/3)(u f' + f)^2 + (f')^2/2 = f^2 ((2/3)(u r + 1)^2 + r^2/2)
    // with r = f'/f.
    let f2 = "(exp(a+b+c)/((u+1/2)^b*(u-1/2)^c))^2";
    let r = "(-(b/(u+1/2)+c/(u-1/2)))";
    let guu = format!("{f2}*((2/3)*(u*{r}+1)^2 + {r}^2/2)");
    let gqq = guu.replace('u', "q");
    MetricPatch::new(
        ScalarField::parse(&guu, &params)?,
        ScalarField::parse("1", &params)?,
        TargetForm::UnitP,
        ScalarField::parse(&gqq, &params)?,
        [0.55, 3.0, -5.0, 5.0],
        Some(ScalarField::parse("v", &params)?),
    )
}
