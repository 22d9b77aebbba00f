//! Transport of Poisson structures along streamlines.
//!
//! A Poisson vector for a field v has no component along the flow, so it
//! factors through the frame as J = C (cos psi n + sin psi b). The Jacobi
//! identity J . (curl J) = 0 pins only the arclength rate of the projective
//! angle psi, leaving the transverse profile free; the conformal scale C
//! rides along with the stretch of the flow. Integrating two angle tracks
//! from one seed yields a compatible pair and, away from track collisions,
//! the conserved covariant directions of the bi-Hamiltonian form.

use crate::diffcalc;
use crate::error::{xyz, Error, Result};
use crate::exprfield::{FieldDef, ScalarField, VectorField, VectorJet};
use crate::frame::{self, Frame, FrameBundle, FrameCase, Helicities};
use crate::tol;
use crate::trajectory::ode::{integrate_adaptive, AdaptiveOptions, State};
use crate::{M3, R3};
use std::f64::consts::PI;
use std::ops::ControlFlow;

/// Arclength rate of mu = tan(psi) demanded by the Jacobi identity.
pub fn riccati_rhs(mu: f64, h: &Helicities) -> f64 {
    h.h_n + mu * (h.h_nb + h.h_bn) + mu * mu * h.h_b
}

/// The same law in the projective angle, regular through mu = infinity.
pub fn angle_rate(psi: f64, h: &Helicities) -> f64 {
    let (s, c) = psi.sin_cos();
    h.h_n * c * c + (h.h_nb + h.h_bn) * s * c + h.h_b * s * s
}

/// Arclength rate of ln C, where C is the full transverse magnitude of J.
///
/// Equivalent to the usual conformal-factor law d ln A/ds =
/// d ln|v|/ds - mu H_b - H_nb with A = C cos(psi), but finite at the poles
/// of mu. `stretch` is the logarithmic speed derivative along the flow.
pub fn scale_rate(psi: f64, h: &Helicities, stretch: f64) -> f64 {
    let (s, c) = psi.sin_cos();
    stretch + (h.h_n - h.h_b) * s * c + (h.h_nb + h.h_bn) * s * s - h.h_nb
}

/// One arclength sample of the transported pair.
#[derive(Debug, Clone)]
pub struct RiccatiSample {
    pub s: f64,
    pub x: R3,
    pub speed: f64,
    pub n: R3,
    pub b: R3,
    pub hel: Helicities,
    /// Projective angle of each track, continuous in s.
    pub psi: [f64; 2],
    /// Log transverse magnitude of each track; C = 1 at the seed.
    pub log_c: [f64; 2],
}

impl RiccatiSample {
    pub fn mu(&self, track: usize) -> f64 {
        self.psi[track].tan()
    }

    /// Unit tangent completing the stored frame.
    pub fn tangent(&self) -> R3 {
        self.n.cross(&self.b)
    }

    pub fn velocity(&self) -> R3 {
        self.speed * self.tangent()
    }

    /// Transverse magnitude C of the track.
    pub fn magnitude(&self, track: usize) -> f64 {
        self.log_c[track].exp()
    }

    /// Conformal factor A = C cos(psi); vanishes where J has no n component.
    pub fn amplitude(&self, track: usize) -> f64 {
        self.magnitude(track) * self.psi[track].cos()
    }

    /// ln |A|; -inf at the poles of mu.
    pub fn log_amplitude(&self, track: usize) -> f64 {
        self.log_c[track] + self.psi[track].cos().abs().ln()
    }

    /// The Poisson vector J of the track at this sample.
    pub fn poisson_vector(&self, track: usize) -> R3 {
        let (s, c) = self.psi[track].sin_cos();
        self.magnitude(track) * (c * self.n + s * self.b)
    }

    /// Conformal factor phi relating the pair to the covariant gradients,
    /// phi = A1 A2 (mu2 - mu1) / |v| written pole-free in the angles.
    pub fn phi(&self) -> f64 {
        let dc = (self.log_c[0] + self.log_c[1]).exp();
        dc * (self.psi[1] - self.psi[0]).sin() / self.speed
    }

    /// Gradients of the two conserved Hamiltonians carried by the pair.
    ///
    /// Signed so that J1 x grad H2 = J2 x grad H1 = v exactly; the returned
    /// vectors are determined up to one constant scale per streamline.
    pub fn covariant_gradients(&self) -> Result<[R3; 2]> {
        let delta = self.psi[1] - self.psi[0];
        if delta.sin().abs() < tol::RICCATI_COLLISION_TOL {
            return Err(Error::RiccatiCollision { s: self.s });
        }
        let (s1, c1) = self.psi[0].sin_cos();
        let (s2, c2) = self.psi[1].sin_cos();
        let g1 = -self.speed / ((self.log_c[1]).exp() * delta.sin()) * (c1 * self.n + s1 * self.b);
        let g2 = self.speed / ((self.log_c[0]).exp() * delta.sin()) * (c2 * self.n + s2 * self.b);
        Ok([g1, g2])
    }
}

/// A compatible pair of Poisson structures along one streamline.
#[derive(Debug, Clone)]
pub struct PoissonPair {
    pub case: FrameCase,
    pub psi0: [f64; 2],
    pub samples: Vec<RiccatiSample>,
}

impl PoissonPair {
    pub fn end(&self) -> &RiccatiSample {
        self.samples.last().expect("pair holds at least the seed")
    }

    /// Pointwise Jacobi scalar J . (curl J) reduced to frame data,
    /// B dA/ds - A dB/ds + A^2 H_n + A B (H_nb + H_bn) + B^2 H_b,
    /// with the arclength derivatives taken by differences of the samples.
    /// Small values certify the transported track satisfies the identity.
    pub fn jacobi_residuals(&self, track: usize) -> Vec<f64> {
        let s: Vec<f64> = self.samples.iter().map(|smp| smp.s).collect();
        let (a, b): (Vec<f64>, Vec<f64>) = self
            .samples
            .iter()
            .map(|smp| {
                let (sn, cs) = smp.psi[track].sin_cos();
                let m = smp.magnitude(track);
                (m * cs, m * sn)
            })
            .unzip();
        (0..self.samples.len())
            .map(|k| {
                let (lo, hi) = stencil(k, s.len());
                let da = lagrange_derivative(&s[lo..hi], &a[lo..hi], s[k]);
                let db = lagrange_derivative(&s[lo..hi], &b[lo..hi], s[k]);
                let h = &self.samples[k].hel;
                b[k] * da - a[k] * db
                    + a[k] * a[k] * h.h_n
                    + a[k] * b[k] * (h.h_nb + h.h_bn)
                    + b[k] * b[k] * h.h_b
            })
            .collect()
    }

    /// Residual of the separation law
    /// d ln(mu2 - mu1)/ds = (H_nb + H_bn) + (mu1 + mu2) H_b
    /// at samples whose whole difference stencil avoids the poles of mu.
    pub fn separation_residuals(&self) -> Vec<(f64, f64)> {
        let safe = |k: usize| self.samples[k].psi.iter().all(|p| p.cos().abs() > 0.3);
        let s: Vec<f64> = self.samples.iter().map(|smp| smp.s).collect();
        let gap: Vec<f64> = self
            .samples
            .iter()
            .map(|smp| (smp.mu(1) - smp.mu(0)).abs().ln())
            .collect();
        (0..self.samples.len())
            .filter_map(|k| {
                let (lo, hi) = stencil(k, s.len());
                if !(lo..hi).all(safe) {
                    return None;
                }
                let fd = lagrange_derivative(&s[lo..hi], &gap[lo..hi], s[k]);
                let smp = &self.samples[k];
                let law = (smp.hel.h_nb + smp.hel.h_bn) + (smp.mu(0) + smp.mu(1)) * smp.hel.h_b;
                Some((smp.s, fd - law))
            })
            .collect()
    }

    /// Residual of the divergence law d ln(phi/|v|)/ds = div t = H_bn - H_nb.
    pub fn divergence_residuals(&self) -> Vec<(f64, f64)> {
        let s: Vec<f64> = self.samples.iter().map(|smp| smp.s).collect();
        let lg: Vec<f64> = self
            .samples
            .iter()
            .map(|smp| (smp.phi() / smp.speed).abs().ln())
            .collect();
        (0..self.samples.len())
            .map(|k| {
                let (lo, hi) = stencil(k, s.len());
                let fd = lagrange_derivative(&s[lo..hi], &lg[lo..hi], s[k]);
                let h = &self.samples[k].hel;
                (self.samples[k].s, fd - (h.h_bn - h.h_nb))
            })
            .collect()
    }

    /// Residual of the angle law itself under sample differences.
    pub fn angle_residuals(&self, track: usize) -> Vec<(f64, f64)> {
        let s: Vec<f64> = self.samples.iter().map(|smp| smp.s).collect();
        let psi: Vec<f64> = self.samples.iter().map(|smp| smp.psi[track]).collect();
        (0..self.samples.len())
            .map(|k| {
                let (lo, hi) = stencil(k, s.len());
                let fd = lagrange_derivative(&s[lo..hi], &psi[lo..hi], s[k]);
                let smp = &self.samples[k];
                (smp.s, fd - angle_rate(smp.psi[track], &smp.hel))
            })
            .collect()
    }
}

/// Five wide difference stencil around k, clamped to the lattice.
pub fn stencil(k: usize, len: usize) -> (usize, usize) {
    const WIDTH: usize = 5;
    if len <= WIDTH {
        return (0, len);
    }
    let lo = k.saturating_sub(WIDTH / 2).min(len - WIDTH);
    (lo, lo + WIDTH)
}

/// Derivative at `at` of the polynomial through the (s, y) pairs. The lattice
/// spacing may be uneven, which keeps the endpoint sample usable.
pub fn lagrange_derivative(s: &[f64], y: &[f64], at: f64) -> f64 {
    let n = s.len();
    let mut acc = 0.0;
    for j in 0..n {
        let mut denom = 1.0;
        let mut num = 0.0;
        for l in 0..n {
            if l == j {
                continue;
            }
            denom *= s[j] - s[l];
            let term: f64 = s
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j && m != l)
                .map(|(_, &sm)| at - sm)
                .product();
            num += term;
        }
        acc += y[j] / denom * num;
    }
    acc
}

/// Projective angle of a conserved gradient in the transverse plane.
///
/// Returns (psi, mu); errors when the gradient has no transverse part, i.e.
/// it is aligned with the flow and carries no Poisson direction.
pub fn mu_from_hamiltonian(grad_h: &R3, fr: &Frame, at: &R3) -> Result<(f64, f64)> {
    let gn = fr.n.dot(grad_h);
    let gb = fr.b.dot(grad_h);
    let transverse = gn.hypot(gb);
    if transverse < 1e-8 * grad_h.norm() || transverse == 0.0 {
        return Err(Error::FlowAlignedGradient { at: xyz(at) });
    }
    let psi = gb.atan2(gn);
    Ok((psi, psi.tan()))
}

/// Integrate the joint system (position, two angle tracks, two scales) in
/// arclength from the seed, sampling on the lattice k * step plus the
/// endpoint. Tracks keep the frame branch chosen at the seed.
pub fn integrate_poisson_pair(
    field: &FieldDef,
    x0: &R3,
    psi0: [f64; 2],
    s_max: f64,
    step: f64,
) -> Result<PoissonPair> {
    let seed = frame::frame_bundle(field, x0)?;
    integrate_pair_frozen(field, x0, psi0, s_max, step, seed.frame.case)
}

pub(crate) fn integrate_pair_frozen(
    field: &FieldDef,
    x0: &R3,
    psi0: [f64; 2],
    s_max: f64,
    step: f64,
    case: FrameCase,
) -> Result<PoissonPair> {
    if !crate::finite_above(s_max, 0.0) || !crate::finite_above(step, 0.0) {
        return Err(Error::InvalidInput(
            "arclength span and sample step must be positive".into(),
        ));
    }
    if wrapped_gap(psi0[0], psi0[1]) < tol::RICCATI_COLLISION_TOL {
        return Err(Error::RiccatiCollision { s: 0.0 });
    }

    let mut rhs_err: Option<Error> = None;
    let rhs = |_s: f64, y: &State<7>| -> Result<State<7>> {
        let x = R3::new(y[0], y[1], y[2]);
        let bundle = frame::frame_bundle_frozen(field, &x, case)?;
        Ok(pair_rates(&bundle, y))
    };

    let mut lattice: Vec<(f64, State<7>)> = Vec::new();
    let mut next = 0.0_f64;
    let mut step_err: Option<Error> = None;
    let y0 = pack_state(x0, psi0);
    let opts = AdaptiveOptions {
        rtol: tol::ODE_RTOL,
        atol: tol::ODE_ATOL,
        ..AdaptiveOptions::default()
    };
    let out = integrate_adaptive(
        |s, y| match rhs(s, y) {
            Ok(v) => Ok(v),
            Err(e) => {
                rhs_err = Some(e.clone());
                Err(e)
            }
        },
        0.0,
        &y0,
        s_max,
        &opts,
        |st| {
            if (st.y1[3] - st.y0[3]).abs() > PI / 2.0 || (st.y1[5] - st.y0[5]).abs() > PI / 2.0 {
                step_err = Some(Error::CaseInstability {
                    at: [st.y1[0], st.y1[1], st.y1[2]],
                    detail: "projective angle advanced more than pi/2 in one step".into(),
                });
                return ControlFlow::Break(());
            }
            if wrapped_gap(st.y1[3], st.y1[5]) < tol::RICCATI_COLLISION_TOL {
                step_err = Some(Error::RiccatiCollision { s: st.t1 });
                return ControlFlow::Break(());
            }
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
            if let Some(e) = step_err {
                return Err(e);
            }
            if lattice.last().map_or(true, |(s, _)| s_max - s > 1e-12) {
                lattice.push((done.t, done.y));
            }
        }
        Err(e) => return Err(rhs_err.unwrap_or(e)),
    }

    let mut samples = Vec::with_capacity(lattice.len());
    for (s, y) in lattice {
        let x = R3::new(y[0], y[1], y[2]);
        let bundle = frame::frame_bundle_frozen(field, &x, case)?;
        samples.push(RiccatiSample {
            s,
            x,
            speed: bundle.ut.speed,
            n: bundle.frame.n,
            b: bundle.frame.b,
            hel: bundle.hel,
            psi: [y[3], y[5]],
            log_c: [y[4], y[6]],
        });
    }
    Ok(PoissonPair {
        case,
        psi0,
        samples,
    })
}

fn pack_state(x: &R3, psi0: [f64; 2]) -> State<7> {
    State::<7>::from_column_slice(&[x.x, x.y, x.z, psi0[0], 0.0, psi0[1], 0.0])
}

fn pair_rates(bundle: &FrameBundle, y: &State<7>) -> State<7> {
    let stretch = bundle.ut.stretch_rate();
    let t = bundle.ut.t;
    let h = &bundle.hel;
    State::<7>::from_column_slice(&[
        t.x,
        t.y,
        t.z,
        angle_rate(y[3], h),
        scale_rate(y[3], h, stretch),
        angle_rate(y[5], h),
        scale_rate(y[5], h, stretch),
    ])
}

/// Angular distance of two projective angles modulo pi.
fn wrapped_gap(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(PI);
    if d > PI / 2.0 {
        d = PI - d;
    }
    d
}

/// Jacobi scalar J . (curl J) of an arbitrary candidate field at a point.
pub fn jacobi_residual(j: &dyn VectorField, x: &R3) -> Result<f64> {
    let jet = j.vector_jet_at(x)?;
    Ok(jet.value.dot(&diffcalc::curl(&jet)))
}

/// Jacobi scalars of the pencil J1 + c J2 for each requested c.
///
/// Both endpoints satisfying the identity makes every pencil member satisfy
/// it exactly when the cross terms cancel; the returned residuals measure
/// that cancellation.
pub fn pencil_residuals(
    j1: &dyn VectorField,
    j2: &dyn VectorField,
    cs: &[f64],
    x: &R3,
) -> Result<Vec<f64>> {
    let a = j1.vector_jet_at(x)?;
    let b = j2.vector_jet_at(x)?;
    Ok(cs
        .iter()
        .map(|&c| {
            let jet = VectorJet {
                value: a.value + c * b.value,
                jacobian: a.jacobian + c * b.jacobian,
            };
            jet.value.dot(&diffcalc::curl(&jet))
        })
        .collect())
}

/// Least-squares factorization v = lambda (grad H1 x grad H2).
#[derive(Debug, Clone, Copy)]
pub struct BiHamiltonian {
    pub lambda: f64,
    pub residual: R3,
}

pub fn bihamiltonian_residual(
    field: &FieldDef,
    h1: &ScalarField,
    h2: &ScalarField,
    x: &R3,
) -> Result<BiHamiltonian> {
    let v = field.value(x)?;
    let w = h1.gradient(x)?.cross(&h2.gradient(x)?);
    let ww = w.norm_squared();
    if ww <= f64::EPSILON * f64::EPSILON {
        return Err(Error::DependentGradients {
            at: xyz(x),
            cross_norm: ww.sqrt(),
        });
    }
    let lambda = v.dot(&w) / ww;
    Ok(BiHamiltonian {
        lambda,
        residual: v - lambda * w,
    })
}

/// A bundle of five parallel streamlines: the center and four neighbors
/// seeded half_width away along the seed normal and binormal. Sample k of
/// every member sits at the same arclength, which is enough to rebuild full
/// spatial derivatives of the transported J field.
#[derive(Debug, Clone)]
pub struct StreamlineTube {
    pub center: PoissonPair,
    pub offsets: [PoissonPair; 4],
    pub half_width: f64,
}

pub fn integrate_tube(
    field: &FieldDef,
    x0: &R3,
    psi0: [f64; 2],
    s_max: f64,
    step: f64,
    half_width: f64,
) -> Result<StreamlineTube> {
    let seed = frame::frame_bundle(field, x0)?;
    let case = seed.frame.case;
    let h = half_width;
    let run = |x: R3| integrate_pair_frozen(field, &x, psi0, s_max, step, case);
    let center = run(*x0)?;
    let offsets = [
        run(x0 + h * seed.frame.n)?,
        run(x0 - h * seed.frame.n)?,
        run(x0 + h * seed.frame.b)?,
        run(x0 - h * seed.frame.b)?,
    ];
    Ok(StreamlineTube {
        center,
        offsets,
        half_width,
    })
}

impl StreamlineTube {
    pub fn len(&self) -> usize {
        self.offsets
            .iter()
            .map(|p| p.samples.len())
            .min()
            .unwrap_or(0)
            .min(self.center.samples.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pointwise Jacobi residual J . (curl J) at sample k, with the curl
    /// assembled from transverse differences across the tube and arclength
    /// differences along the center. Independent of the reduced frame form,
    /// so it cross-checks the transport.
    pub fn jacobi_residual(&self, k: usize, track: usize) -> Result<f64> {
        let len = self.len();
        if k >= len || len < 2 {
            return Err(Error::InvalidInput(
                "tube Jacobi residual needs a sampled lattice index".into(),
            ));
        }
        let c = &self.center.samples[k];
        let j_at = |p: &PoissonPair| p.samples[k].poisson_vector(track);
        let x_at = |p: &PoissonPair| p.samples[k].x;
        let d_n = (x_at(&self.offsets[0]) - x_at(&self.offsets[1])) / 2.0;
        let d_b = (x_at(&self.offsets[2]) - x_at(&self.offsets[3])) / 2.0;
        let dj_n = (j_at(&self.offsets[0]) - j_at(&self.offsets[1])) / 2.0;
        let dj_b = (j_at(&self.offsets[2]) - j_at(&self.offsets[3])) / 2.0;
        let t_dir = c.tangent();
        let (lo, hi) = stencil(k, self.center.samples.len());
        let s: Vec<f64> = self.center.samples[lo..hi].iter().map(|p| p.s).collect();
        let mut dj_s = R3::zeros();
        for axis in 0..3 {
            let comp: Vec<f64> = self.center.samples[lo..hi]
                .iter()
                .map(|p| p.poisson_vector(track)[axis])
                .collect();
            dj_s[axis] = lagrange_derivative(&s, &comp, c.s);
        }

        let mut dirs = M3::zeros();
        dirs.set_column(0, &d_n);
        dirs.set_column(1, &d_b);
        dirs.set_column(2, &t_dir);
        let mut diffs = M3::zeros();
        diffs.set_column(0, &dj_n);
        diffs.set_column(1, &dj_b);
        diffs.set_column(2, &dj_s);
        let inv = dirs.try_inverse().ok_or_else(|| {
            Error::InvalidInput("tube directions degenerate; widen the tube".into())
        })?;
        let grad_j = diffs * inv;
        let curl = diffcalc::curl_from_jacobian(&grad_j);
        Ok(c.poisson_vector(track).dot(&curl))
    }
}
