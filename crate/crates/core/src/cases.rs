//! Built-in verification systems with known potentials and invariants.
//!
//! Each case bundles a gradient field with its potential, whatever
//! closed-form Hamiltonians exist, the conserved expressions worth
//! monitoring, and a sampling region that stays clear of stagnation sets
//! and singular loci. The registry is the ground truth the verification
//! suites run against.

use crate::error::{Error, Result};
use crate::exprfield::{parse_field, FieldDef, GradField, Params, ScalarField, VectorField};
use crate::R3;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const THIRD: f64 = 1.0 / 3.0;

/// Admissible sampling region of a case.
#[derive(Debug, Clone, Copy)]
pub enum Region {
    /// Spherical shell with the polar caps and a slab around the x = 0
    /// plane removed: the conserved ratios divide by x and the distance
    /// seeds sit on the axes.
    PuncturedShell { r_min: f64, r_max: f64 },
    /// Cube of half-width `half` minus a margin around every coordinate
    /// plane, where the quadratic field stagnates.
    OffPlaneBox { half: f64, margin: f64 },
    /// Wedge x > y > z with a pairwise margin, inside a bounding cube.
    Wedge { margin: f64, half: f64 },
}

impl Region {
    pub fn contains(&self, x: &R3) -> bool {
        match *self {
            Region::PuncturedShell { r_min, r_max } => {
                let r = x.norm();
                (r_min..=r_max).contains(&r)
                    && x.x.abs() >= 0.15 * r
                    && x.x.abs() <= 0.9 * r
                    && x.z.abs() <= 0.9 * r
            }
            Region::OffPlaneBox { half, margin } => {
                [x.x, x.y, x.z]
                    .iter()
                    .all(|c| c.abs() >= margin && c.abs() <= half)
            }
            Region::Wedge { margin, half } => {
                x.x - x.y >= margin
                    && x.y - x.z >= margin
                    && [x.x, x.y, x.z].iter().all(|c| c.abs() <= half)
            }
        }
    }
}

/// A named gradient system with its verification data.
pub struct CaseSystem {
    pub name: &'static str,
    pub field: FieldDef,
    pub potential: ScalarField,
    /// Closed-form Hamiltonians, when the case has them.
    pub hamiltonians: Vec<ScalarField>,
    /// Conserved expressions monitored along trajectories.
    pub conserved: Vec<ScalarField>,
    pub region: Region,
    /// Human-readable description of the excluded set.
    pub exclusion: &'static str,
    pub params: Params,
}

impl CaseSystem {
    pub fn admissible(&self, x: &R3) -> bool {
        self.region.contains(x)
    }

    pub fn default_seed(&self) -> R3 {
        match self.name {
            "sphere" => R3::new(1.0, 2.0, 3.0),
            "euler-like" => R3::new(0.2, 0.3, 0.4),
            _ => R3::new(3.0, 2.0, 1.0),
        }
    }

    /// Random admissible points; rejection sampling except in the wedge,
    /// which is built constructively from coordinate gaps.
    pub fn sample_points(&self, count: usize, rng: &mut impl Rng) -> Vec<R3> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let x = match self.region {
                Region::PuncturedShell { r_max, .. } => R3::new(
                    rng.random_range(-r_max..r_max),
                    rng.random_range(-r_max..r_max),
                    rng.random_range(-r_max..r_max),
                ),
                Region::OffPlaneBox { half, .. } => R3::new(
                    rng.random_range(-half..half),
                    rng.random_range(-half..half),
                    rng.random_range(-half..half),
                ),
                Region::Wedge { .. } => {
                    let z = rng.random_range(-2.0..2.0);
                    let y = z + rng.random_range(0.1..1.5);
                    let x = y + rng.random_range(0.1..1.5);
                    R3::new(x, y, z)
                }
            };
            if self.admissible(&x) {
                out.push(x);
            }
        }
        out
    }

    /// Checks the registry data against itself at 100 sampled points: the
    /// field must be the exact gradient of the potential and every listed
    /// conserved expression must be orthogonal to the flow.
    pub fn self_test(&self) -> Result<()> {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for x in self.sample_points(100, &mut rng) {
            let v = self.field.value(&x)?;
            let scale = 1.0 + v.norm();
            let g = self.potential.gradient(&x)?;
            if (g - v).norm() > 1e-10 * scale {
                return Err(Error::InvalidInput(format!(
                    "case `{}`: field is not the gradient of its potential, \
                     mismatch {:.3e} at ({:.3}, {:.3}, {:.3})",
                    self.name,
                    (g - v).norm(),
                    x.x,
                    x.y,
                    x.z
                )));
            }
            for h in &self.conserved {
                let gh = h.gradient(&x)?;
                let drift = gh.dot(&v).abs();
                if drift > 1e-10 * scale * (1.0 + gh.norm()) {
                    return Err(Error::InvalidInput(format!(
                        "case `{}`: conserved expression leaks {:.3e} along the flow",
                        self.name, drift
                    )));
                }
            }
        }
        Ok(())
    }

    /// Gradient extensions of two independent conserved quantities, for
    /// the rescaled-commutation check. None when the case has only one
    /// closed-form invariant.
    pub fn distance_extensions(&self) -> Option<[Box<dyn VectorField + Send + Sync>; 2]> {
        match self.name {
            "sphere" => Some([
                Box::new(GradField(self.hamiltonians[0].clone())),
                Box::new(GradField(self.hamiltonians[1].clone())),
            ]),
            "euler-like" => Some([
                Box::new(parse_field("x", "y", "-2*z", &Params::new()).expect("fixed expr")),
                Box::new(parse_field("-x", "0", "z", &Params::new()).expect("fixed expr")),
            ]),
            _ => None,
        }
    }

    /// Seed points for the distance-function Hamiltonians, when the case
    /// geometry has canonical ones.
    pub fn distance_seeds(&self) -> Option<[R3; 2]> {
        match self.name {
            "sphere" => Some([R3::new(0.0, 0.0, 1.0), R3::new(1.0, 0.0, 0.0)]),
            _ => None,
        }
    }
}

pub fn case_names() -> [&'static str; 3] {
    ["sphere", "euler-like", "aristotle"]
}

/// Builds a named case and runs its self-test. sphere and euler-like take
/// no parameters; aristotle takes the weights a, b, c together or not at
/// all (defaulting to 1/3 each).
pub fn get_case(name: &str, params: &Params) -> Result<CaseSystem> {
    let case = match name {
        "sphere" => {
            require_no_params("sphere", params)?;
            let p = Params::new();
            CaseSystem {
                name: "sphere",
                field: parse_field("x", "y", "z", &p)?,
                potential: ScalarField::parse("(x^2+y^2+z^2)/2", &p)?,
                hamiltonians: vec![
                    ScalarField::parse("arccos(z/sqrt(x^2+y^2+z^2))", &p)?,
                    ScalarField::parse("arccos(x/sqrt(x^2+y^2+z^2))", &p)?,
                ],
                conserved: vec![
                    ScalarField::parse("y/x", &p)?,
                    ScalarField::parse("z/x", &p)?,
                ],
                region: Region::PuncturedShell {
                    r_min: 0.3,
                    r_max: 4.0,
                },
                exclusion: "radii outside [0.3, 4], the slab |x| < 0.15 r, the polar caps \
                            |x| > 0.9 r or |z| > 0.9 r",
                params: p,
            }
        }
        "euler-like" => {
            require_no_params("euler-like", params)?;
            let p = Params::new();
            CaseSystem {
                name: "euler-like",
                field: parse_field("y*z", "x*z", "x*y", &p)?,
                potential: ScalarField::parse("x*y*z", &p)?,
                hamiltonians: vec![
                    ScalarField::parse("(x^2+y^2-2*z^2)/2", &p)?,
                    ScalarField::parse("(z^2-x^2)/2", &p)?,
                ],
                conserved: vec![
                    ScalarField::parse("(x^2+y^2-2*z^2)/2", &p)?,
                    ScalarField::parse("(z^2-x^2)/2", &p)?,
                ],
                region: Region::OffPlaneBox {
                    half: 2.0,
                    margin: 0.15,
                },
                exclusion: "within 0.15 of any coordinate plane or outside the cube |x_i| <= 2",
                params: p,
            }
        }
        "aristotle" => {
            let (a, b, c) = aristotle_weights(params)?;
            let mut p = Params::new();
            p.insert("a".into(), a);
            p.insert("b".into(), b);
            p.insert("c".into(), c);
            CaseSystem {
                name: "aristotle",
                field: parse_field(
                    "b/(x-z)+c/(x-y)",
                    "a/(y-z)-c/(x-y)",
                    "-a/(y-z)-b/(x-z)",
                    &p,
                )?,
                potential: ScalarField::parse("a*ln(y-z)+b*ln(x-z)+c*ln(x-y)", &p)?,
                hamiltonians: vec![ScalarField::parse("(x+y+z)/sqrt(3)", &p)?],
                conserved: vec![ScalarField::parse("(x+y+z)/sqrt(3)", &p)?],
                region: Region::Wedge {
                    margin: 0.05,
                    half: 5.0,
                },
                exclusion: "outside the wedge x - y >= 0.05, y - z >= 0.05 or the cube \
                            |x_i| <= 5",
                params: p,
            }
        }
        other => {
            return Err(Error::UnknownCase {
                name: other.to_string(),
            })
        }
    };
    case.self_test()?;
    Ok(case)
}

fn require_no_params(case: &str, params: &Params) -> Result<()> {
    if params.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParams {
            case: case.to_string(),
            reason: "takes no parameters".to_string(),
        })
    }
}

fn aristotle_weights(params: &Params) -> Result<(f64, f64, f64)> {
    let (a, b, c) = match (params.get("a"), params.get("b"), params.get("c")) {
        (None, None, None) if params.is_empty() => (THIRD, THIRD, THIRD),
        (Some(&a), Some(&b), Some(&c)) if params.len() == 3 => (a, b, c),
        _ => {
            return Err(Error::InvalidParams {
                case: "aristotle".to_string(),
                reason: "supply all of a, b, c or none".to_string(),
            })
        }
    };
    if ![a, b, c].iter().all(|w| w.is_finite()) {
        return Err(Error::InvalidParams {
            case: "aristotle".to_string(),
            reason: "weights must be finite".to_string(),
        });
    }
    Ok((a, b, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfgeo::aristotle_patch;
    use crate::trajectory::{integrate_flow, FlowOptions};
    use crate::M3;
    use approx::assert_relative_eq;

    #[test]
    fn registry_is_populated_and_self_consistent() {
        for name in case_names() {
            let case = get_case(name, &Params::new()).unwrap();
            assert_eq!(case.name, name);
            assert!(case.admissible(&case.default_seed()));
            assert!(case.self_test().is_ok());
        }
        let sphere = get_case("sphere", &Params::new()).unwrap();
        let v = sphere.field.value(&R3::new(1.0, 2.0, 3.0)).unwrap();
        assert_relative_eq!(v, R3::new(1.0, 2.0, 3.0), epsilon = 1e-15);
        let euler = get_case("euler-like", &Params::new()).unwrap();
        let h2 = euler.hamiltonians[1].value(&R3::new(1.0, 2.0, 3.0)).unwrap();
        assert_relative_eq!(h2, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn sampled_points_stay_admissible() {
        let mut rng = StdRng::seed_from_u64(7);
        for name in case_names() {
            let case = get_case(name, &Params::new()).unwrap();
            for x in case.sample_points(200, &mut rng) {
                assert!(case.admissible(&x), "{name} emitted {x:?}");
            }
        }
    }

    #[test]
    fn bad_case_requests_are_rejected() {
        assert!(matches!(
            get_case("moebius", &Params::new()),
            Err(Error::UnknownCase { .. })
        ));
        let mut partial = Params::new();
        partial.insert("a".into(), 1.0);
        assert!(matches!(
            get_case("aristotle", &partial),
            Err(Error::InvalidParams { .. })
        ));
        let mut bad = Params::new();
        bad.insert("a".into(), 1.0);
        bad.insert("b".into(), 1.0);
        bad.insert("c".into(), f64::NAN);
        assert!(matches!(
            get_case("aristotle", &bad),
            Err(Error::InvalidParams { .. })
        ));
        let mut extra = Params::new();
        extra.insert("k".into(), 2.0);
        assert!(matches!(
            get_case("sphere", &extra),
            Err(Error::InvalidParams { .. })
        ));
    }

    #[test]
    fn extension_pairs_rebuild_the_flow_direction() {
        let mut rng = StdRng::seed_from_u64(11);
        for name in ["sphere", "euler-like"] {
            let case = get_case(name, &Params::new()).unwrap();
            let [w1, w2] = case.distance_extensions().unwrap();
            for x in case.sample_points(20, &mut rng) {
                let v = case.field.value(&x).unwrap();
                let cross = w1.value_at(&x).unwrap().cross(&w2.value_at(&x).unwrap());
                let miss = v.cross(&cross).norm() / (v.norm() * cross.norm());
                assert!(miss < 1e-10, "{name}: misalignment {miss:e}");
            }
        }
        assert!(get_case("aristotle", &Params::new())
            .unwrap()
            .distance_extensions()
            .is_none());
    }

    /// Newton solve for the wedge point with prescribed potential level and
    /// surface coordinates (u, w).
    fn wedge_point(case: &CaseSystem, coords: &[ScalarField; 2], target: [f64; 3], guess: R3) -> R3 {
        let mut p = guess;
        for _ in 0..60 {
            let fj = case.potential.jet(&p).unwrap();
            let uj = coords[0].jet(&p).unwrap();
            let wj = coords[1].jet(&p).unwrap();
            let r = R3::new(
                fj.value - target[0],
                uj.value - target[1],
                wj.value - target[2],
            );
            if r.norm() < 1e-13 {
                break;
            }
            let jac = M3::from_rows(&[
                fj.grad.transpose(),
                uj.grad.transpose(),
                wj.grad.transpose(),
            ]);
            let dp = jac.lu().solve(&(-r)).expect("coordinate Jacobian regular");
            let mut s = 1.0;
            for _ in 0..30 {
                let q = p + s * dp;
                if q.x - q.y > 1e-6 && q.y - q.z > 1e-6 {
                    break;
                }
                s *= 0.5;
            }
            p += s * dp;
        }
        p
    }

    #[test]
    fn wedge_metric_matches_the_embedded_surface() {
        let case = get_case("aristotle", &Params::new()).unwrap();
        let patch = aristotle_patch(THIRD, THIRD, THIRD).unwrap();
        let coords = [
            ScalarField::parse("(x-z)/(y-z)-1/2", &Params::new()).unwrap(),
            ScalarField::parse("(x+y+z)/sqrt(3)", &Params::new()).unwrap(),
        ];
        let seed = case.default_seed();
        let level = case.potential.value(&seed).unwrap();
        let w0 = coords[1].value(&seed).unwrap();
        // The patch coefficients are normalized to the level surface at
        // a + b + c; other levels are scaled copies of it.
        let scale = (level - 1.0).exp();
        let h = 1e-5;
        for u in [1.0, 1.5, 2.0, 2.5] {
            let pm = wedge_point(&case, &coords, [level, u - h, w0], seed);
            let pp = wedge_point(&case, &coords, [level, u + h, w0], seed);
            let speed = (pp - pm).norm() / (2.0 * h);
            let guu = patch.g_uu.value(&R3::new(u, 0.0, 0.0)).unwrap();
            assert_relative_eq!(speed, scale * guu.sqrt(), max_relative = 1e-5);
        }
    }

    #[test]
    fn quadrature_invariant_is_conserved_on_the_canonical_ray() {
        let case = get_case("aristotle", &Params::new()).unwrap();
        let patch = aristotle_patch(THIRD, THIRD, THIRD).unwrap();
        let ucoord = ScalarField::parse("(x-z)/(y-z)-1/2", &Params::new()).unwrap();
        let mut opts = FlowOptions::new(2.0);
        opts.sample_interval = Some(0.1);
        let run = integrate_flow(&case.field, &case.default_seed(), &opts, &[]).unwrap();
        let mut h2 = Vec::new();
        for smp in &run.samples {
            let u = ucoord.value(&smp.x).unwrap();
            h2.push(patch.u_arclength(0.0, 1.0, u).unwrap());
        }
        let drift = h2
            .iter()
            .map(|q| (q - h2[0]).abs())
            .fold(0.0, f64::max);
        assert!(h2[0] > 0.1, "quadrature leg has real length: {}", h2[0]);
        assert!(drift < 1e-6, "second-invariant drift {drift:e}");
    }
}
