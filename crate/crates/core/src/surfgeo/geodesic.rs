//! Geodesics on implicit level sets, shot and measured numerically.

use crate::error::{xyz, Error, Result};
use crate::exprfield::{Axis, FieldDef, ScalarField};
use crate::frame::{self, Frame};
use crate::poisson::{lagrange_derivative, stencil};
use crate::tol;
use crate::trajectory::ode::{integrate_adaptive, AdaptiveOptions, State};
use crate::R3;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::ops::ControlFlow;

/// One level set F(x) = c of a scalar potential, with its gradient field
/// kept in symbolic form so frames and Hessians are exact.
#[derive(Debug, Clone)]
pub struct Surface {
    potential: ScalarField,
    level: f64,
    grad: FieldDef,
}

impl Surface {
    pub fn new(potential: ScalarField, level: f64) -> Result<Self> {
        let grad = FieldDef::new(
            [
                potential.expr.derivative(Axis::X)?,
                potential.expr.derivative(Axis::Y)?,
                potential.expr.derivative(Axis::Z)?,
            ],
            potential.params.clone(),
        );
        Ok(Surface {
            potential,
            level,
            grad,
        })
    }

    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// The gradient of the potential as a vector field.
    pub fn gradient_field(&self) -> &FieldDef {
        &self.grad
    }

    pub fn residual(&self, x: &R3) -> Result<f64> {
        Ok(self.potential.value(x)? - self.level)
    }

    /// Newton steps along the gradient until the level residual is below
    /// the projection tolerance.
    pub fn project(&self, x: &R3) -> Result<R3> {
        let scale = 1.0 + self.level.abs();
        let mut y = *x;
        for _ in 0..tol::SURFACE_PROJECTION_MAX_ITER {
            let jet = self.potential.jet(&y)?;
            let r = jet.value - self.level;
            if r.abs() <= tol::SURFACE_PROJECTION_TOL * scale {
                return Ok(y);
            }
            let gg = jet.grad.norm_squared();
            if gg < tol::STAGNATION_SPEED * tol::STAGNATION_SPEED {
                return Err(Error::IrregularPoint {
                    at: xyz(&y),
                    grad_norm: gg.sqrt(),
                });
            }
            y -= (r / gg) * jet.grad;
        }
        Err(Error::ProjectionFailed { at: xyz(x) })
    }

    /// Remove the normal component of w at x.
    pub fn tangent_project(&self, x: &R3, w: &R3) -> Result<R3> {
        let g = self.potential.gradient(x)?;
        let gn = g.norm();
        if gn < tol::STAGNATION_SPEED {
            return Err(Error::IrregularPoint {
                at: xyz(x),
                grad_norm: gn,
            });
        }
        let u = g / gn;
        Ok(w - w.dot(&u) * u)
    }

    /// Frame of the gradient field; (n, b) span the tangent plane at x.
    pub fn frame(&self, x: &R3) -> Result<Frame> {
        frame::frame_at(&self.grad, x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GeodesicSample {
    pub sigma: f64,
    pub x: R3,
    pub tangent: R3,
    /// Components of the tangent in the frame legs (n, b) at x.
    pub xi: f64,
    pub eta: f64,
}

#[derive(Debug, Clone)]
pub struct GeodesicOptions {
    pub step: f64,
    pub max_steps: usize,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            step: 5e-3,
            max_steps: 2_000_000,
        }
    }
}

/// Integrate the geodesic from x0 with initial direction t0 for the given
/// arclength. Acceleration stays purely normal, x'' = lambda grad F with
/// lambda = -(T . Hess F . T)/|grad F|^2, and every step is followed by a
/// projection of the point back to the level set and of the tangent back to
/// the tangent plane.
pub fn geodesic_integrate(
    surface: &Surface,
    x0: &R3,
    t0: &R3,
    length: f64,
    opts: &GeodesicOptions,
) -> Result<Vec<GeodesicSample>> {
    if !crate::finite_above(length, 0.0) || !crate::finite_above(opts.step, 0.0) {
        return Err(Error::InvalidInput(
            "geodesic length and step must be positive".into(),
        ));
    }
    let mut x = surface.project(x0)?;
    let mut t = unit_tangent_on(surface, &x, t0)?;
    let steps = (length / opts.step).ceil() as usize;
    if steps > opts.max_steps {
        return Err(Error::InvalidInput(format!(
            "geodesic span needs {steps} steps, above the cap {}",
            opts.max_steps
        )));
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(sample_at(surface, 0.0, x, t)?);
    let mut sigma = 0.0;
    for _ in 0..steps {
        let h = (length - sigma).min(opts.step);
        (x, t) = rk4_geodesic_step(surface, &x, &t, h)?;
        x = surface.project(&x)?;
        t = unit_tangent_on(surface, &x, &t)?;
        sigma += h;
        out.push(sample_at(surface, sigma, x, t)?);
    }
    Ok(out)
}

fn unit_tangent_on(surface: &Surface, x: &R3, w: &R3) -> Result<R3> {
    let t = surface.tangent_project(x, w)?;
    let n = t.norm();
    if n < 1e-12 {
        return Err(Error::InvalidInput(
            "initial direction is normal to the surface".into(),
        ));
    }
    Ok(t / n)
}

fn sample_at(surface: &Surface, sigma: f64, x: R3, t: R3) -> Result<GeodesicSample> {
    let fr = surface.frame(&x)?;
    Ok(GeodesicSample {
        sigma,
        x,
        tangent: t,
        xi: t.dot(&fr.n),
        eta: t.dot(&fr.b),
    })
}

fn geodesic_rhs(surface: &Surface, x: &R3, t: &R3) -> Result<(R3, R3)> {
    let jet = surface.potential.jet(x)?;
    let gg = jet.grad.norm_squared();
    if gg < tol::STAGNATION_SPEED * tol::STAGNATION_SPEED {
        return Err(Error::IrregularPoint {
            at: xyz(x),
            grad_norm: gg.sqrt(),
        });
    }
    let lambda = -t.dot(&(jet.hess * t)) / gg;
    Ok((*t, lambda * jet.grad))
}

fn rk4_geodesic_step(surface: &Surface, x: &R3, t: &R3, h: f64) -> Result<(R3, R3)> {
    let (k1x, k1t) = geodesic_rhs(surface, x, t)?;
    let (k2x, k2t) = geodesic_rhs(surface, &(x + 0.5 * h * k1x), &(t + 0.5 * h * k1t))?;
    let (k3x, k3t) = geodesic_rhs(surface, &(x + 0.5 * h * k2x), &(t + 0.5 * h * k2t))?;
    let (k4x, k4t) = geodesic_rhs(surface, &(x + h * k3x), &(t + h * k3t))?;
    Ok((
        x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        t + (h / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t),
    ))
}

/// Geodesic curvature along an integrated polyline, measured as the
/// projection of the differenced tangent on t x T. Vanishes on honest
/// geodesics regardless of the integrator's internals.
pub fn measured_geodesic_curvature(
    surface: &Surface,
    samples: &[GeodesicSample],
) -> Result<Vec<f64>> {
    let s: Vec<f64> = samples.iter().map(|p| p.sigma).collect();
    let mut out = Vec::with_capacity(samples.len());
    for k in 0..samples.len() {
        let (lo, hi) = stencil(k, samples.len());
        let mut dt = R3::zeros();
        for axis in 0..3 {
            let comp: Vec<f64> = samples[lo..hi].iter().map(|p| p.tangent[axis]).collect();
            dt[axis] = lagrange_derivative(&s[lo..hi], &comp, s[k]);
        }
        let g = surface.potential.gradient(&samples[k].x)?;
        let t_surf = g / g.norm();
        out.push(dt.dot(&t_surf.cross(&samples[k].tangent)));
    }
    Ok(out)
}

/// Arclength of the shortest connecting geodesic found by shooting from p
/// toward x: multistart over the aim angle, secant refinement on the signed
/// lateral miss at closest approach.
pub fn geodesic_distance(surface: &Surface, p: &R3, x: &R3) -> Result<f64> {
    let opts = GeodesicOptions::default();
    geodesic_distance_with(surface, p, x, &opts)
}

pub fn geodesic_distance_with(
    surface: &Surface,
    p: &R3,
    x: &R3,
    opts: &GeodesicOptions,
) -> Result<f64> {
    let p = surface.project(p)?;
    let target = surface.project(x)?;
    let chord = (target - p).norm();
    if chord < tol::SHOOTING_MISS_TOL {
        return Ok(0.0);
    }
    let fr = surface.frame(&p)?;
    let aim = surface.tangent_project(&p, &(target - p))?;
    let theta0 = if aim.norm() > 1e-12 {
        aim.dot(&fr.b).atan2(aim.dot(&fr.n))
    } else {
        0.0
    };
    let length_cap = 4.0 * chord;

    let shoot = |theta: f64| -> Result<Shot> {
        shoot_once(surface, &p, &fr, theta, length_cap, &target, opts)
    };
    let starts: Vec<f64> = (0..tol::SHOOTING_MULTISTARTS)
        .map(|k| theta0 + 2.0 * PI * k as f64 / tol::SHOOTING_MULTISTARTS as f64)
        .collect();
    let shots: Vec<Shot> = starts
        .par_iter()
        .map(|&th| shoot(th))
        .collect::<Result<_>>()?;

    let mut best: Option<f64> = None;
    let mut best_miss = f64::INFINITY;
    for s in &shots {
        best_miss = best_miss.min(s.miss.abs());
        if s.miss.abs() < tol::SHOOTING_MISS_TOL {
            best = Some(best.map_or(s.sigma, |b: f64| b.min(s.sigma)));
        }
    }
    // Secant refinement across every adjacent sign change of the miss.
    let brackets: Vec<(Shot, Shot)> = (0..shots.len())
        .filter(|&i| {
            let a = &shots[i];
            let b = &shots[(i + 1) % shots.len()];
            a.miss.signum() != b.miss.signum()
        })
        .map(|i| (shots[i].clone(), shots[(i + 1) % shots.len()].clone()))
        .collect();
    let refined: Vec<Result<Option<Shot>>> = brackets
        .into_par_iter()
        .map(|(a, b)| refine_bracket(a, b, &shoot))
        .collect();
    for r in refined {
        if let Some(s) = r? {
            best_miss = best_miss.min(s.miss.abs());
            best = Some(best.map_or(s.sigma, |b: f64| b.min(s.sigma)));
        }
    }
    best.ok_or(Error::ShootingFailed {
        from: xyz(&p),
        to: xyz(&target),
        best_miss,
    })
}

#[derive(Debug, Clone)]
struct Shot {
    theta: f64,
    /// Signed lateral miss at the closest approach to the target.
    miss: f64,
    /// Arclength of the closest approach.
    sigma: f64,
}

fn refine_bracket(
    mut a: Shot,
    mut b: Shot,
    shoot: &(dyn Fn(f64) -> Result<Shot> + Sync),
) -> Result<Option<Shot>> {
    for _ in 0..40 {
        let denom = b.miss - a.miss;
        if denom.abs() < f64::EPSILON {
            return Ok(None);
        }
        let theta = b.theta - b.miss * (b.theta - a.theta) / denom;
        let s = shoot(theta)?;
        if s.miss.abs() < tol::SHOOTING_MISS_TOL {
            return Ok(Some(s));
        }
        if (b.theta - a.theta).abs() < 1e-15 {
            return Ok(None);
        }
        if s.miss.signum() == a.miss.signum() {
            a = s;
        } else {
            b = s;
        }
    }
    Ok(None)
}

fn shoot_once(
    surface: &Surface,
    p: &R3,
    fr: &Frame,
    theta: f64,
    length: f64,
    target: &R3,
    opts: &GeodesicOptions,
) -> Result<Shot> {
    let t0 = theta.cos() * fr.n + theta.sin() * fr.b;
    let path = geodesic_integrate(surface, p, &t0, length, opts)?;
    let mut k_min = 0;
    let mut d_min = f64::INFINITY;
    for (k, smp) in path.iter().enumerate() {
        let d = (smp.x - target).norm_squared();
        if d < d_min {
            d_min = d;
            k_min = k;
        }
    }
    // Parabolic vertex of the squared distance around the discrete minimum;
    // at a boundary the closest approach is the boundary sample itself.
    let (sigma, near, tangent) = if k_min == 0 || k_min + 1 == path.len() {
        let s = &path[k_min];
        (s.sigma, s.x, s.tangent)
    } else {
        let f = |k: usize| (path[k].x - target).norm_squared();
        let (fm, f0, fp) = (f(k_min - 1), f(k_min), f(k_min + 1));
        let h = path[k_min].sigma - path[k_min - 1].sigma;
        let curve = fm - 2.0 * f0 + fp;
        let shift = if curve.abs() > 0.0 {
            (0.5 * h * (fm - fp) / curve).clamp(-h, h)
        } else {
            0.0
        };
        let sigma = path[k_min].sigma + shift;
        // Quadratic interpolation of the pierce point and tangent.
        let u = shift / h;
        let interp = |a: R3, b: R3, c: R3| {
            b + 0.5 * u * (c - a) + 0.5 * u * u * (a - 2.0 * b + c)
        };
        let near = interp(path[k_min - 1].x, path[k_min].x, path[k_min + 1].x);
        let tangent = interp(
            path[k_min - 1].tangent,
            path[k_min].tangent,
            path[k_min + 1].tangent,
        );
        (sigma, near, tangent)
    };
    let delta = target - near;
    let g = surface.potential.gradient(&near)?;
    let lateral = g.cross(&tangent);
    let lnorm = lateral.norm();
    let lat = if lnorm > 1e-12 {
        delta.dot(&(lateral / lnorm))
    } else {
        delta.norm()
    };
    // An endpoint closest approach never pierces the target; report the
    // full gap there so a backward shot cannot pass as a zero-length hit.
    let miss = if k_min == 0 || k_min + 1 == path.len() {
        lat.signum() * delta.norm().max(lat.abs())
    } else {
        lat
    };
    Ok(Shot { theta, miss, sigma })
}

/// Per-sample report of the distance Hamiltonian checks.
#[derive(Debug, Clone)]
pub struct DistanceSample {
    pub x: R3,
    pub d: [f64; 2],
    /// | |grad_surf d| - 1 | for each seed point.
    pub unit_gradient_error: [f64; 2],
    /// Norm of the cross product of the two surface gradients.
    pub independence: f64,
    /// Change of each distance after one unit of flow time followed by a
    /// projection back to the surface along the streamline.
    pub flow_drift: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct DistanceCheck {
    pub samples: Vec<DistanceSample>,
    pub max_unit_gradient_error: f64,
    pub min_independence: f64,
    pub max_flow_drift: f64,
    /// Whether the two distance gradients stay independent at every sample.
    pub independent: bool,
}

/// Verify the defining properties of the two geodesic distance functions
/// d(., p1), d(., p2): unit surface gradient, constancy along the flow of
/// the potential gradient, and mutual independence.
pub fn distance_hamiltonian_check(
    surface: &Surface,
    seeds: [R3; 2],
    samples: &[R3],
) -> Result<DistanceCheck> {
    let mut out = Vec::with_capacity(samples.len());
    for raw in samples {
        let x = surface.project(raw)?;
        let fr = surface.frame(&x)?;
        let moved = flow_unit_time(surface, &x)?;
        let back = flow_project(surface, &moved)?;
        let mut d = [0.0; 2];
        let mut unit_err = [0.0; 2];
        let mut grads = [R3::zeros(); 2];
        let mut drift = [0.0; 2];
        for (i, p) in seeds.iter().enumerate() {
            d[i] = geodesic_distance(surface, p, &x)?;
            grads[i] = surface_gradient(surface, p, &x, &fr)?;
            unit_err[i] = (grads[i].norm() - 1.0).abs();
            drift[i] = (geodesic_distance(surface, p, &back)? - d[i]).abs();
        }
        out.push(DistanceSample {
            x,
            d,
            unit_gradient_error: unit_err,
            independence: grads[0].cross(&grads[1]).norm(),
            flow_drift: drift,
        });
    }
    let max_unit = out
        .iter()
        .flat_map(|s| s.unit_gradient_error)
        .fold(0.0, f64::max);
    let min_ind = out.iter().map(|s| s.independence).fold(f64::INFINITY, f64::min);
    let max_drift = out.iter().flat_map(|s| s.flow_drift).fold(0.0, f64::max);
    Ok(DistanceCheck {
        samples: out,
        max_unit_gradient_error: max_unit,
        min_independence: min_ind,
        max_flow_drift: max_drift,
        independent: min_ind > 1e-6,
    })
}

/// Surface gradient of d(., p) at x by central differences along projected
/// frame directions.
fn surface_gradient(surface: &Surface, p: &R3, x: &R3, fr: &Frame) -> Result<R3> {
    let h = tol::SURFACE_FD_STEP;
    let mut g = R3::zeros();
    for leg in [fr.n, fr.b] {
        let xp = surface.project(&(x + h * leg))?;
        let xm = surface.project(&(x - h * leg))?;
        let dp = geodesic_distance(surface, p, &xp)?;
        let dm = geodesic_distance(surface, p, &xm)?;
        let span = xp - xm;
        g += (dp - dm) / span.norm() * (span / span.norm());
    }
    Ok(g)
}

/// Advance one unit of flow time along the potential gradient.
fn flow_unit_time(surface: &Surface, x: &R3) -> Result<R3> {
    let grad = surface.gradient_field();
    let mut pending: Option<Error> = None;
    let out = integrate_adaptive(
        |_t, y: &State<3>| match grad.value(&R3::new(y[0], y[1], y[2])) {
            Ok(v) => Ok(State::<3>::new(v.x, v.y, v.z)),
            Err(e) => {
                pending = Some(e.clone());
                Err(e)
            }
        },
        0.0,
        &State::<3>::new(x.x, x.y, x.z),
        1.0,
        &AdaptiveOptions::default(),
        |_| ControlFlow::Continue(()),
    );
    match out {
        Ok(done) => Ok(R3::new(done.y[0], done.y[1], done.y[2])),
        Err(e) => Err(pending.unwrap_or(e)),
    }
}

/// Pull a point back to the surface along its own streamline: integrate the
/// gradient flow toward the level set and refine the crossing on the dense
/// output. The potential is monotone along its gradient flow, so the
/// crossing is unique.
pub fn flow_project(surface: &Surface, y: &R3) -> Result<R3> {
    let start_res = surface.residual(y)?;
    if start_res.abs() <= tol::SURFACE_PROJECTION_TOL * (1.0 + surface.level().abs()) {
        return Ok(*y);
    }
    let sign = -start_res.signum();
    let grad = surface.gradient_field();
    let mut pending: Option<Error> = None;
    let mut hit: Option<R3> = None;
    let out = integrate_adaptive(
        |_t, s: &State<3>| match grad.value(&R3::new(s[0], s[1], s[2])) {
            Ok(v) => Ok(sign * State::<3>::new(v.x, v.y, v.z)),
            Err(e) => {
                pending = Some(e.clone());
                Err(e)
            }
        },
        0.0,
        &State::<3>::new(y.x, y.y, y.z),
        1e6,
        &AdaptiveOptions::default(),
        |step| {
            let res_at = |t: f64| -> f64 {
                let s = step.sample(t);
                surface
                    .residual(&R3::new(s[0], s[1], s[2]))
                    .unwrap_or(f64::NAN)
            };
            let r1 = res_at(step.t1);
            if !r1.is_finite() {
                return ControlFlow::Continue(());
            }
            if r1.signum() != start_res.signum() || r1 == 0.0 {
                let (mut lo, mut hi) = (step.t0, step.t1);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if res_at(mid).signum() == start_res.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let s = step.sample(0.5 * (lo + hi));
                hit = Some(R3::new(s[0], s[1], s[2]));
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        },
    );
    match out {
        Ok(_) => match hit {
            // One Newton polish removes the bisection slack.
            Some(h) => surface.project(&h),
            None => Err(Error::ProjectionFailed { at: xyz(y) }),
        },
        Err(e) => Err(pending.unwrap_or(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfield::Params;
    use approx::assert_relative_eq;

    fn unit_sphere() -> Surface {
        let p = ScalarField::parse("(x^2+y^2+z^2)/2", &Params::new()).unwrap();
        Surface::new(p, 0.5).unwrap()
    }

    fn plane() -> Surface {
        let p = ScalarField::parse("z", &Params::new()).unwrap();
        Surface::new(p, 0.0).unwrap()
    }

    #[test]
    fn great_circle_closes_after_full_turn() {
        let s = unit_sphere();
        let x0 = R3::new(1.0, 0.0, 0.0);
        let path = geodesic_integrate(
            &s,
            &x0,
            &R3::new(0.0, 1.0, 0.0),
            2.0 * PI,
            &GeodesicOptions::default(),
        )
        .unwrap();
        let end = path.last().unwrap();
        assert!((end.x - x0).norm() < 1e-6, "gap {}", (end.x - x0).norm());
        for smp in &path {
            assert!(smp.x.z.abs() < 1e-9, "left the great circle plane");
            assert!(s.residual(&smp.x).unwrap().abs() < 1e-9);
            assert!((smp.tangent.norm() - 1.0).abs() < 1e-10);
            assert!(
                (smp.xi * smp.xi + smp.eta * smp.eta - 1.0).abs() < 1e-10,
                "tangent components not unit"
            );
        }
    }

    #[test]
    fn integrated_geodesics_have_no_geodesic_curvature() {
        let s = unit_sphere();
        let path = geodesic_integrate(
            &s,
            &R3::new(0.0, 0.6, 0.8),
            &R3::new(1.0, 0.3, -0.1),
            2.0,
            &GeodesicOptions::default(),
        )
        .unwrap();
        for kg in measured_geodesic_curvature(&s, &path).unwrap() {
            assert!(kg.abs() < 1e-6, "measured geodesic curvature {kg}");
        }
    }

    #[test]
    fn sphere_distance_matches_arc_length() {
        let s = unit_sphere();
        let p = R3::new(0.0, 0.0, 1.0);
        let x = R3::new(0.8, -0.36, 0.48).normalize();
        let d = geodesic_distance(&s, &p, &x).unwrap();
        assert_relative_eq!(d, p.dot(&x).acos(), epsilon = 1e-7);
    }

    #[test]
    fn plane_distance_is_euclidean() {
        let s = plane();
        let p = R3::new(0.2, -0.4, 0.0);
        let x = R3::new(1.7, 1.1, 0.0);
        let d = geodesic_distance(&s, &p, &x).unwrap();
        assert_relative_eq!(d, (x - p).norm(), epsilon = 1e-8);
    }

    #[test]
    fn distance_is_symmetric() {
        let s = unit_sphere();
        let p = R3::new(0.6, 0.64, 0.48).normalize();
        let x = R3::new(-0.3, 0.9, 0.2).normalize();
        let a = geodesic_distance(&s, &p, &x).unwrap();
        let b = geodesic_distance(&s, &x, &p).unwrap();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn flow_projection_returns_to_the_level_set() {
        let s = unit_sphere();
        let y = R3::new(1.3, -0.8, 0.9);
        let back = flow_project(&s, &y).unwrap();
        assert!(s.residual(&back).unwrap().abs() < 1e-9);
        // Radial flow: the projection keeps the direction.
        assert!((back.normalize() - y.normalize()).norm() < 1e-8);
    }

    #[test]
    fn distance_hamiltonians_pass_on_the_sphere() {
        let s = unit_sphere();
        let seeds = [R3::new(0.0, 0.0, 1.0), R3::new(1.0, 0.0, 0.0)];
        let samples = [
            R3::new(0.5, 0.7, 0.5),
            R3::new(-0.4, 0.6, 0.7),
            R3::new(0.3, -0.8, 0.5),
        ];
        let report = distance_hamiltonian_check(&s, seeds, &samples).unwrap();
        assert!(report.max_unit_gradient_error < 1e-4);
        assert!(report.max_flow_drift < 1e-6);
        assert!(report.independent);
        for smp in &report.samples {
            // Known closed forms from the two poles used as seeds.
            let x = smp.x;
            assert_relative_eq!(smp.d[0], (x.z / x.norm()).acos(), epsilon = 1e-6);
            assert_relative_eq!(smp.d[1], (x.x / x.norm()).acos(), epsilon = 1e-6);
        }
    }

    #[test]
    fn antipodal_seeds_lose_independence() {
        let s = unit_sphere();
        let seeds = [R3::new(0.0, 0.0, 1.0), R3::new(0.0, 0.0, -1.0)];
        let samples = [R3::new(0.8, 0.3, 0.5)];
        let report = distance_hamiltonian_check(&s, seeds, &samples).unwrap();
        assert!(!report.independent);
        assert!(report.min_independence < 1e-6);
    }
}
