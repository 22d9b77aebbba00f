//! Embedded Runge-Kutta integrators over small fixed-size states.
//!
//! The adaptive scheme is the Dormand-Prince 5(4) pair with FSAL and a PI
//! step controller; the fixed scheme is classic RK4. Both report accepted
//! steps through a callback that can stop the run early, and each step
//! carries endpoint derivatives so callers can sample inside it with a
//! cubic Hermite interpolant.
//!
//! A right-hand side returning an error is treated as a rejected step (the
//! trial point left the admissible region); the step size is cut until it
//! underflows, at which point the last good state is reported.

use std::ops::ControlFlow;

use nalgebra::SVector;

use crate::{tol, Error, Result};

pub type State<const N: usize> = SVector<f64, N>;

/// One accepted step with endpoint derivatives.
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: State<N>,
    pub y1: State<N>,
    pub f0: State<N>,
    pub f1: State<N>,
    /// Fourth-order dense-output correction; absent on fixed RK4 steps,
    /// where plain Hermite is already at the step accuracy.
    quartic: Option<State<N>>,
}

impl<const N: usize> Step<N> {
    /// Dense sample at a time inside the step: cubic Hermite on the
    /// endpoint data plus the embedded quartic correction when present.
    pub fn sample(&self, t: f64) -> State<N> {
        let h = self.t1 - self.t0;
        let u = (t - self.t0) / h;
        let dy = self.y1 - self.y0;
        let r3 = self.f0 * h - dy;
        let r4 = dy * 2.0 - (self.f0 + self.f1) * h;
        let mut inner = r4;
        if let Some(q) = &self.quartic {
            inner += q * (1.0 - u);
        }
        self.y0 + (dy + (r3 + inner * u) * (1.0 - u)) * u
    }

    pub fn contains(&self, t: f64) -> bool {
        let lo = self.t0.min(self.t1);
        let hi = self.t0.max(self.t1);
        (lo..=hi).contains(&t)
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Magnitude of the first trial step; estimated from the initial
    /// derivative when absent.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rtol: tol::ODE_RTOL,
            atol: tol::ODE_ATOL,
            initial_step: None,
            max_steps: 2_000_000,
        }
    }
}

/// Where an integration ended.
#[derive(Debug, Clone)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: State<N>,
    pub accepted_steps: usize,
    /// True when the step callback requested the stop.
    pub stopped_early: bool,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between the 5th and embedded 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Weights of the fourth-order continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn underflow<const N: usize>(t: f64, y: &State<N>) -> Error {
    Error::StepUnderflow {
        t,
        state: y.iter().copied().collect(),
    }
}

fn min_step(t: f64) -> f64 {
    1e-13 * t.abs().max(1.0)
}

/// Integrate dy/dt = rhs(t, y) from t0 to t_end with adaptive steps.
pub fn integrate_adaptive<const N: usize>(
    mut rhs: impl FnMut(f64, &State<N>) -> Result<State<N>>,
    t0: f64,
    y0: &State<N>,
    t_end: f64,
    opts: &AdaptiveOptions,
    mut on_step: impl FnMut(&Step<N>) -> ControlFlow<()>,
) -> Result<Outcome<N>> {
    let span = t_end - t0;
    let mut y = *y0;
    let mut t = t0;
    let mut f = rhs(t, &y)?;
    if span == 0.0 {
        return Ok(Outcome {
            t,
            y,
            accepted_steps: 0,
            stopped_early: false,
        });
    }
    let dir = span.signum();
    let mut h = dir
        * opts
            .initial_step
            .map(f64::abs)
            .unwrap_or_else(|| guess_initial_step(opts, &y, &f, span));
    let safe = 0.9;
    let mut err_prev: f64 = 1e-4;
    let mut accepted = 0usize;
    let mut evaluations = 0usize;

    loop {
        if evaluations > opts.max_steps {
            return Err(Error::InvalidInput(format!(
                "integration exceeded the {} step budget",
                opts.max_steps
            )));
        }
        evaluations += 1;
        let mut last = false;
        if (t + h - t_end) * dir >= 0.0 {
            h = t_end - t;
            last = true;
        }
        if h.abs() < min_step(t) {
            return Err(underflow(t, &y));
        }

        let stages = (|| -> Result<[State<N>; 7]> {
            let k1 = f;
            let k2 = rhs(t + C[0] * h, &(y + k1 * (A2[0] * h)))?;
            let k3 = rhs(t + C[1] * h, &(y + (k1 * A3[0] + k2 * A3[1]) * h))?;
            let k4 = rhs(
                t + C[2] * h,
                &(y + (k1 * A4[0] + k2 * A4[1] + k3 * A4[2]) * h),
            )?;
            let k5 = rhs(
                t + C[3] * h,
                &(y + (k1 * A5[0] + k2 * A5[1] + k3 * A5[2] + k4 * A5[3]) * h),
            )?;
            let k6 = rhs(
                t + C[4] * h,
                &(y + (k1 * A6[0] + k2 * A6[1] + k3 * A6[2] + k4 * A6[3] + k5 * A6[4]) * h),
            )?;
            let y_next = y
                + (k1 * A7[0] + k3 * A7[2] + k4 * A7[3] + k5 * A7[4] + k6 * A7[5]) * h;
            let k7 = rhs(t + h, &y_next)?;
            Ok([k1, k2, k3, k4, k5, k6, k7])
        })();

        let [k1, _k2, k3, k4, k5, k6, k7] = match stages {
            Ok(ks) => ks,
            Err(_) => {
                // Trial point fell out of the admissible region; retreat.
                h *= 0.5;
                continue;
            }
        };
        let y_next =
            y + (k1 * A7[0] + k3 * A7[2] + k4 * A7[3] + k5 * A7[4] + k6 * A7[5]) * h;
        let err_vec =
            (k1 * E[0] + k3 * E[2] + k4 * E[3] + k5 * E[4] + k6 * E[5] + k7 * E[6]) * h;
        let mut acc = 0.0;
        for i in 0..N {
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_next[i].abs());
            let r = err_vec[i] / sc;
            acc += r * r;
        }
        let err = (acc / N as f64).sqrt();

        if !err.is_finite() {
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            let quartic = (k1 * D[0] + k3 * D[2] + k4 * D[3] + k5 * D[4] + k6 * D[5]
                + k7 * D[6])
                * h;
            let step = Step {
                t0: t,
                t1: t + h,
                y0: y,
                y1: y_next,
                f0: k1,
                f1: k7,
                quartic: Some(quartic),
            };
            t += h;
            y = y_next;
            f = k7;
            accepted += 1;
            if let ControlFlow::Break(()) = on_step(&step) {
                return Ok(Outcome {
                    t,
                    y,
                    accepted_steps: accepted,
                    stopped_early: true,
                });
            }
            if last {
                return Ok(Outcome {
                    t,
                    y,
                    accepted_steps: accepted,
                    stopped_early: false,
                });
            }
            let fac = (safe * err.powf(-0.17) * err_prev.powf(0.04)).clamp(0.2, 10.0);
            h *= fac;
            err_prev = err.max(1e-4);
        } else {
            let fac = (safe * err.powf(-0.2)).clamp(0.1, 0.5);
            h *= fac;
        }
    }
}

fn guess_initial_step<const N: usize>(
    opts: &AdaptiveOptions,
    y: &State<N>,
    f: &State<N>,
    span: f64,
) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / sc) * (y[i] / sc);
        d1 += (f[i] / sc) * (f[i] / sc);
    }
    let d0 = (d0 / N as f64).sqrt();
    let d1 = (d1 / N as f64).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h.min(span.abs() / 10.0)
}

/// Integrate with the classic fixed-step fourth-order scheme. The final
/// step is shortened to land on t_end exactly; all interior step
/// boundaries are t0 + i*h so repeated runs are bitwise reproducible.
pub fn integrate_fixed<const N: usize>(
    mut rhs: impl FnMut(f64, &State<N>) -> Result<State<N>>,
    t0: f64,
    y0: &State<N>,
    t_end: f64,
    h: f64,
    mut on_step: impl FnMut(&Step<N>) -> ControlFlow<()>,
) -> Result<Outcome<N>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!(
            "fixed step must be positive and finite, got {h}"
        )));
    }
    let span = t_end - t0;
    let mut y = *y0;
    let mut f = rhs(t0, &y)?;
    if span == 0.0 {
        return Ok(Outcome {
            t: t0,
            y,
            accepted_steps: 0,
            stopped_early: false,
        });
    }
    let dir = span.signum();
    let n_whole = (span.abs() / h).floor() as usize;
    let mut accepted = 0usize;
    let mut t = t0;
    let mut index = 0usize;
    loop {
        let t_next = if index < n_whole {
            t0 + dir * h * (index + 1) as f64
        } else {
            t_end
        };
        if (t_next - t) * dir <= 0.0 {
            return Ok(Outcome {
                t,
                y,
                accepted_steps: accepted,
                stopped_early: false,
            });
        }
        let dt = t_next - t;
        let k1 = f;
        let k2 = rhs(t + 0.5 * dt, &(y + k1 * (0.5 * dt)))?;
        let k3 = rhs(t + 0.5 * dt, &(y + k2 * (0.5 * dt)))?;
        let k4 = rhs(t + dt, &(y + k3 * dt))?;
        let y_next = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        let f_next = rhs(t_next, &y_next)?;
        let step = Step {
            t0: t,
            t1: t_next,
            y0: y,
            y1: y_next,
            f0: k1,
            f1: f_next,
            quartic: None,
        };
        t = t_next;
        y = y_next;
        f = f_next;
        accepted += 1;
        index += 1;
        if let ControlFlow::Break(()) = on_step(&step) {
            return Ok(Outcome {
                t,
                y,
                accepted_steps: accepted,
                stopped_early: true,
            });
        }
        if t == t_end {
            return Ok(Outcome {
                t,
                y,
                accepted_steps: accepted,
                stopped_early: false,
            });
        }
    }
}
