//! Streamline integration with conservation monitors.
//!
//! A trajectory follows dx/dt = v(x) and carries the accumulated
//! arclength s (ds/dt = |v|) so downstream consumers can reparametrise.
//! Scalar monitors, typically conserved quantities of the flow, are
//! evaluated at every emitted sample; their drift over a run is the
//! headline verification number.

pub mod ode;

use std::ops::ControlFlow;

use crate::error::xyz;
use crate::exprfield::{ScalarField, VectorField};
use crate::{tol, Error, Result, R3};
use ode::{integrate_adaptive, integrate_fixed, AdaptiveOptions, State, Step};

#[derive(Debug, Clone)]
pub struct FlowOptions {
    /// Integration span in flow time; negative runs the flow backward.
    pub horizon: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Fixed RK4 step; when present the adaptive controller is bypassed
    /// and output is bitwise reproducible.
    pub fixed_step: Option<f64>,
    /// Uniform spacing of emitted samples; every accepted step otherwise.
    pub sample_interval: Option<f64>,
    pub max_steps: usize,
}

impl FlowOptions {
    pub fn new(horizon: f64) -> Self {
        FlowOptions {
            horizon,
            rtol: tol::ODE_RTOL,
            atol: tol::ODE_ATOL,
            fixed_step: None,
            sample_interval: None,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: R3,
    /// Arclength accumulated since the seed.
    pub s: f64,
    pub speed: f64,
    /// Monitor values in the order they were passed in.
    pub monitors: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub monitor_names: Vec<String>,
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn end(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has samples")
    }

    /// Largest absolute deviation of a monitor from its seed value.
    pub fn conservation_drift(&self, monitor: usize) -> f64 {
        let m0 = self.samples[0].monitors[monitor];
        self.samples
            .iter()
            .map(|s| (s.monitors[monitor] - m0).abs())
            .fold(0.0, f64::max)
    }

    /// Whether a monitor grows monotonically along the run, within slack.
    pub fn monitor_is_increasing(&self, monitor: usize, slack: f64) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[1].monitors[monitor] - w[0].monitors[monitor] >= -slack)
    }
}

/// Integrate the flow of `field` from `x0`, evaluating `monitors` at every
/// emitted sample.
pub fn integrate_flow(
    field: &dyn VectorField,
    x0: &R3,
    opts: &FlowOptions,
    monitors: &[(&str, &ScalarField)],
) -> Result<Trajectory> {
    let rhs = |_t: f64, y: &State<4>| -> Result<State<4>> {
        let x = R3::new(y[0], y[1], y[2]);
        let v = field.value_at(&x)?;
        let speed = v.norm();
        if speed < tol::STAGNATION_SPEED {
            return Err(Error::Stagnation {
                at: xyz(&x),
                speed,
            });
        }
        Ok(State::<4>::new(v.x, v.y, v.z, speed))
    };

    let y0 = State::<4>::new(x0.x, x0.y, x0.z, 0.0);
    let mut samples = Vec::new();
    let mut pending: Option<Error> = None;
    let dir = if opts.horizon < 0.0 { -1.0 } else { 1.0 };

    let emit = |t: f64, y: &State<4>, samples: &mut Vec<TrajectorySample>| -> Result<()> {
        let x = R3::new(y[0], y[1], y[2]);
        let speed = field.value_at(&x)?.norm();
        let mut values = Vec::with_capacity(monitors.len());
        for (_, m) in monitors {
            values.push(m.value(&x)?);
        }
        samples.push(TrajectorySample {
            t,
            x,
            s: y[3],
            speed,
            monitors: values,
        });
        Ok(())
    };

    emit(0.0, &y0, &mut samples)?;
    let mut next_t = opts.sample_interval.map(|dt| dt.abs() * dir);

    {
        let mut on_step = |step: &Step<4>| -> ControlFlow<()> {
            let mut run = |samples: &mut Vec<TrajectorySample>| -> Result<()> {
                match next_t {
                    Some(ref mut target) => {
                        while (step.t1 - *target) * dir >= -1e-12 {
                            let y = if (*target - step.t1).abs() < 1e-12 {
                                step.y1
                            } else {
                                step.sample(*target)
                            };
                            emit(*target, &y, samples)?;
                            *target += opts.sample_interval.unwrap().abs() * dir;
                        }
                    }
                    None => emit(step.t1, &step.y1, samples)?,
                }
                Ok(())
            };
            match run(&mut samples) {
                Ok(()) => ControlFlow::Continue(()),
                Err(e) => {
                    pending = Some(e);
                    ControlFlow::Break(())
                }
            }
        };

        let outcome = match opts.fixed_step {
            Some(h) => integrate_fixed(rhs, 0.0, &y0, opts.horizon, h, &mut on_step)?,
            None => {
                let adaptive = AdaptiveOptions {
                    rtol: opts.rtol,
                    atol: opts.atol,
                    initial_step: None,
                    max_steps: opts.max_steps,
                };
                integrate_adaptive(rhs, 0.0, &y0, opts.horizon, &adaptive, &mut on_step)?
            }
        };
        if let Some(e) = pending {
            return Err(e);
        }
        let last_t = samples.last().map(|s| s.t).unwrap_or(f64::NAN);
        if (outcome.t - last_t).abs() > 1e-12 * outcome.t.abs().max(1.0) {
            emit(outcome.t, &outcome.y, &mut samples)?;
        }
    }

    Ok(Trajectory {
        monitor_names: monitors.iter().map(|(n, _)| n.to_string()).collect(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfield::{parse_field, FieldDef, Params};

    fn field(fx: &str, fy: &str, fz: &str) -> FieldDef {
        parse_field(fx, fy, fz, &Params::new()).unwrap()
    }

    fn scalar(src: &str) -> ScalarField {
        ScalarField::parse(src, &Params::new()).unwrap()
    }

    #[test]
    fn radial_flow_matches_exponential() {
        let v = field("x", "y", "z");
        let opts = FlowOptions::new(2.0f64.ln());
        let traj = integrate_flow(&v, &R3::new(1.0, 0.0, 0.0), &opts, &[]).unwrap();
        let end = traj.end();
        assert!((end.x - R3::new(2.0, 0.0, 0.0)).norm() < 1e-9);
        // Arclength equals the radius gained.
        assert!((end.s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn conserved_quantities_stay_put() {
        // The flow escapes to infinity near t = 3.36 from this seed; stay
        // well inside that horizon. The potential x*y*z itself grows along
        // the flow; the conserved pair is orthogonal to it.
        let v = field("y*z", "x*z", "x*y");
        let h1 = scalar("(x^2+y^2-2*z^2)/2");
        let h2 = scalar("(z^2-x^2)/2");
        let f = scalar("x*y*z");
        let opts = FlowOptions::new(2.0);
        let traj = integrate_flow(
            &v,
            &R3::new(0.2, 0.3, 0.4),
            &opts,
            &[("H1", &h1), ("H2", &h2), ("F", &f)],
        )
        .unwrap();
        assert!(traj.conservation_drift(0) < 1e-9);
        assert!(traj.conservation_drift(1) < 1e-9);
        assert!(traj.monitor_is_increasing(2, 1e-12));
    }

    #[test]
    fn stagnation_point_is_an_error() {
        let v = field("x", "y", "z");
        let opts = FlowOptions::new(1.0);
        match integrate_flow(&v, &R3::zeros(), &opts, &[]) {
            Err(Error::Stagnation { .. }) => {}
            other => panic!("expected stagnation, got {other:?}"),
        }
    }

    #[test]
    fn finite_time_blow_up_reports_underflow() {
        // On the diagonal the right-hand side is x^2 per component, which
        // blows up at t = 1/x0.
        let v = field("y*z", "x*z", "x*y");
        let opts = FlowOptions::new(2.0);
        match integrate_flow(&v, &R3::new(1.0, 1.0, 1.0), &opts, &[]) {
            Err(Error::StepUnderflow { t, .. }) => {
                assert!((t - 1.0).abs() < 1e-3, "blow-up time estimate {t}")
            }
            other => panic!("expected step underflow, got {other:?}"),
        }
    }

    #[test]
    fn uniform_sampling_hits_the_requested_lattice() {
        let v = field("x", "y", "z");
        let mut opts = FlowOptions::new(1.0);
        opts.sample_interval = Some(0.1);
        let traj = integrate_flow(&v, &R3::new(1.0, 0.0, 0.0), &opts, &[]).unwrap();
        assert_eq!(traj.samples.len(), 11);
        for (k, s) in traj.samples.iter().enumerate() {
            assert!((s.t - 0.1 * k as f64).abs() < 1e-12);
            assert!((s.x.x - s.t.exp()).abs() < 1e-8, "sample error at t={}", s.t);
        }
    }

    #[test]
    fn fixed_step_runs_are_bitwise_identical() {
        let v = field("y*z", "x*z", "x*y");
        let mut opts = FlowOptions::new(1.0);
        opts.fixed_step = Some(0.01);
        let run = || integrate_flow(&v, &R3::new(0.2, 0.3, 0.4), &opts, &[]).unwrap();
        let a = run();
        let b = run();
        assert_eq!(a.samples.len(), b.samples.len());
        for (p, q) in a.samples.iter().zip(&b.samples) {
            assert_eq!(p.x.x.to_bits(), q.x.x.to_bits());
            assert_eq!(p.x.y.to_bits(), q.x.y.to_bits());
            assert_eq!(p.x.z.to_bits(), q.x.z.to_bits());
            assert_eq!(p.s.to_bits(), q.s.to_bits());
        }
    }

    #[test]
    fn monotone_monitor_detection() {
        let radial = field("x", "y", "z");
        let potential = scalar("(x^2+y^2+z^2)/2");
        let opts = FlowOptions::new(1.0);
        let traj = integrate_flow(
            &radial,
            &R3::new(1.0, 0.0, 0.0),
            &opts,
            &[("F", &potential)],
        )
        .unwrap();
        assert!(traj.monitor_is_increasing(0, 1e-12));

        let rotation = field("-y", "x", "0");
        let height = scalar("x");
        let traj = integrate_flow(
            &rotation,
            &R3::new(1.0, 0.0, 0.0),
            &opts,
            &[("x", &height)],
        )
        .unwrap();
        assert!(!traj.monitor_is_increasing(0, 1e-12));
    }
}
