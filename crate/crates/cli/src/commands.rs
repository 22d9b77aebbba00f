//! Subcommand implementations on top of the library crate.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::json;

use streamframe::exprfield::ScalarField;
use streamframe::frame;
use streamframe::surfgeo::{
    geodesic_distance, geodesic_integrate, measured_geodesic_curvature, GeodesicOptions, Surface,
};
use streamframe::trajectory::{integrate_flow, FlowOptions};
use streamframe::{diffcalc, poisson, R3};

use crate::config::{
    self, parse_pair, parse_point, parse_span, pick, pick_f64, FileDefaults, Source,
};
use crate::output::{parse_format, render_record, vec3, write_out, Format, Table};
use crate::verify::run_verify;
use crate::{Command, SourceArgs};

pub fn dispatch(cmd: Command, file: &FileDefaults, out: Option<&Path>) -> Result<ExitCode> {
    let out = out
        .map(Path::to_path_buf)
        .or_else(|| file.get("out").map(PathBuf::from));
    let out = out.as_deref();
    match cmd {
        Command::Analyze { source, at } => {
            let source = resolve(source, file)?;
            let at = point_or_seed(at, file, "at", &source)?;
            cmd_analyze(&source, &at, out)
        }
        Command::Flow {
            source,
            x0,
            t,
            rtol,
            atol,
            fixed_step,
            monitor,
            format,
        } => {
            let source = resolve(source, file)?;
            let x0 = point_or_seed(x0, file, "x0", &source)?;
            let span = span_or(t, file, "t", (0.0, 1.0))?;
            let rtol = pick_f64(rtol, file, "rtol")?;
            let atol = pick_f64(atol, file, "atol")?;
            let fixed_step = pick_f64(fixed_step, file, "fixed-step")?;
            let monitor = pick(monitor, file, "monitor");
            let format = parse_format(pick(format, file, "format"), Format::Csv)?;
            cmd_flow(&source, &x0, span, rtol, atol, fixed_step, monitor, format, out)
        }
        Command::Riccati {
            source,
            x0,
            s,
            mu0,
            fixed_step,
            format,
        } => {
            let source = resolve(source, file)?;
            let x0 = point_or_seed(x0, file, "x0", &source)?;
            let span = span_or(s, file, "s", (0.0, 0.6))?;
            let mu0 = match pick(mu0, file, "mu0") {
                Some(raw) => parse_pair(&raw)?,
                None => [0.0, 1.0],
            };
            let step = pick_f64(fixed_step, file, "fixed-step")?.unwrap_or(0.02);
            let format = parse_format(pick(format, file, "format"), Format::Csv)?;
            cmd_riccati(&source, &x0, span, mu0, step, format, out)
        }
        Command::Geodesic {
            source,
            x0,
            dir,
            s,
            c,
            fixed_step,
            format,
        } => {
            let source = resolve(source, file)?;
            let x0 = point_or_seed(x0, file, "x0", &source)?;
            let dir = match pick(dir, file, "dir") {
                Some(raw) => Some(parse_point(&raw)?),
                None => None,
            };
            let span = span_or(s, file, "s", (0.0, 1.0))?;
            let c = pick_f64(c, file, "c")?;
            let step = pick_f64(fixed_step, file, "fixed-step")?;
            let format = parse_format(pick(format, file, "format"), Format::Csv)?;
            cmd_geodesic(&source, &x0, dir, span, c, step, format, out)
        }
        Command::Distance { source, p, x, c } => {
            let source = resolve(source, file)?;
            let p = required_point(pick(p, file, "p"), "--p")?;
            let x = required_point(pick(x, file, "x"), "--x")?;
            let c = pick_f64(c, file, "c")?;
            cmd_distance(&source, &p, &x, c, out)
        }
        Command::Verify { source } => {
            let case = pick(source.case, file, "case");
            let params = pick(source.params, file, "params")
                .as_deref()
                .map(config::parse_params)
                .transpose()?
                .unwrap_or_default();
            if source.field.is_some() {
                bail!("verify runs built-in cases; --field has no checks");
            }
            run_verify(case.as_deref(), &params, out)
        }
    }
}

fn resolve(args: SourceArgs, file: &FileDefaults) -> Result<Source> {
    config::resolve_source(
        pick(args.case, file, "case"),
        pick(args.field, file, "field"),
        pick(args.params, file, "params"),
    )
}

fn required_point(raw: Option<String>, flag: &str) -> Result<R3> {
    let raw = raw.ok_or_else(|| anyhow!("{flag} x,y,z is required"))?;
    parse_point(&raw)
}

fn point_or_seed(raw: Option<String>, file: &FileDefaults, key: &str, source: &Source) -> Result<R3> {
    match pick(raw, file, key) {
        Some(raw) => parse_point(&raw),
        None => source
            .default_seed()
            .ok_or_else(|| anyhow!("--{key} x,y,z is required with --field")),
    }
}

fn span_or(
    raw: Option<String>,
    file: &FileDefaults,
    key: &str,
    default: (f64, f64),
) -> Result<(f64, f64)> {
    match pick(raw, file, key) {
        Some(raw) => parse_span(&raw),
        None => Ok(default),
    }
}

fn cmd_analyze(source: &Source, at: &R3, out: Option<&Path>) -> Result<ExitCode> {
    let field = source.field();
    let bundle = frame::frame_bundle(field, at)?;
    let vj = field.jet(at)?.vector_jet();
    let hel: serde_json::Map<String, serde_json::Value> = bundle
        .hel
        .entries()
        .iter()
        .map(|(name, value)| (name.to_string(), json!(value)))
        .collect();
    let record = json!({
        "at": vec3(at),
        "case": bundle.frame.case.to_string(),
        "speed": vj.value.norm(),
        "t": vec3(&bundle.frame.t),
        "n": vec3(&bundle.frame.n),
        "b": vec3(&bundle.frame.b),
        "helicities": hel,
        "curl_v": vec3(&diffcalc::curl(&vj)),
        "div_v": diffcalc::divergence(&vj),
    });
    write_out(out, &render_record(record))?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_flow(
    source: &Source,
    x0: &R3,
    (t0, t1): (f64, f64),
    rtol: Option<f64>,
    atol: Option<f64>,
    fixed_step: Option<f64>,
    monitor: Option<String>,
    format: Format,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let mut opts = FlowOptions::new(t1 - t0);
    if let Some(r) = rtol {
        opts.rtol = r;
    }
    if let Some(a) = atol {
        opts.atol = a;
    }
    opts.fixed_step = fixed_step;

    let mut names = Vec::new();
    let mut fields = Vec::new();
    match monitor {
        Some(list) => {
            for expr in list.split(',') {
                names.push(expr.to_string());
                fields.push(
                    ScalarField::parse(expr, source.params())
                        .with_context(|| format!("monitor `{expr}`"))?,
                );
            }
        }
        None => {
            if let Some(sys) = source.case() {
                for (k, h) in sys.conserved.iter().enumerate() {
                    names.push(format!("inv{}", k + 1));
                    fields.push(h.clone());
                }
            }
        }
    }
    let monitors: Vec<(&str, &ScalarField)> = names
        .iter()
        .map(String::as_str)
        .zip(fields.iter())
        .collect();

    let traj = integrate_flow(source.field(), x0, &opts, &monitors)?;
    let mut headers = vec!["t", "x", "y", "z", "s"];
    headers.extend(names.iter().map(String::as_str));
    let mut table = Table::new(headers);
    for smp in &traj.samples {
        let mut row = vec![t0 + smp.t, smp.x.x, smp.x.y, smp.x.z, smp.s];
        row.extend_from_slice(&smp.monitors);
        table.push(row);
    }
    write_out(out, &table.render(format))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_riccati(
    source: &Source,
    x0: &R3,
    (s0, s1): (f64, f64),
    mu0: [f64; 2],
    step: f64,
    format: Format,
    out: Option<&Path>,
) -> Result<ExitCode> {
    if s0 != 0.0 {
        bail!("the arclength span starts at the seed; use --s 0,SMAX");
    }
    // atan carries mu = inf to the binormal angle pi/2
    let psi0 = [mu0[0].atan(), mu0[1].atan()];
    let pair = poisson::integrate_poisson_pair(source.field(), x0, psi0, s1, step)?;
    let jac = [pair.jacobi_residuals(0), pair.jacobi_residuals(1)];
    let mut table = Table::new([
        "s", "x", "y", "z", "psi1", "psi2", "mu1", "mu2", "logA1", "logA2", "jacobi1", "jacobi2",
    ]);
    for (k, smp) in pair.samples.iter().enumerate() {
        table.push(vec![
            smp.s,
            smp.x.x,
            smp.x.y,
            smp.x.z,
            smp.psi[0],
            smp.psi[1],
            smp.mu(0),
            smp.mu(1),
            smp.log_amplitude(0),
            smp.log_amplitude(1),
            jac[0][k],
            jac[1][k],
        ]);
    }
    write_out(out, &table.render(format))?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_geodesic(
    source: &Source,
    x0: &R3,
    dir: Option<R3>,
    (s0, s1): (f64, f64),
    c: Option<f64>,
    step: Option<f64>,
    format: Format,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let sys = source
        .case()
        .ok_or_else(|| anyhow!("geodesic needs the potential surface of a --case"))?;
    let level = match c {
        Some(c) => c,
        None => sys.potential.value(x0)?,
    };
    let surface = Surface::new(sys.potential.clone(), level)?;
    let start = surface.project(x0)?;
    let t0 = match dir {
        Some(d) => d,
        None => surface.frame(&start)?.n,
    };
    let mut opts = GeodesicOptions::default();
    if let Some(h) = step {
        opts.step = h;
    }
    let samples = geodesic_integrate(&surface, &start, &t0, s1 - s0, &opts)?;
    let kappa = measured_geodesic_curvature(&surface, &samples)?;
    let mut table = Table::new(["sigma", "x", "y", "z", "tx", "ty", "tz", "kappa_g"]);
    for (smp, kg) in samples.iter().zip(kappa) {
        table.push(vec![
            s0 + smp.sigma,
            smp.x.x,
            smp.x.y,
            smp.x.z,
            smp.tangent.x,
            smp.tangent.y,
            smp.tangent.z,
            kg,
        ]);
    }
    write_out(out, &table.render(format))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_distance(
    source: &Source,
    p: &R3,
    x: &R3,
    c: Option<f64>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let sys = source
        .case()
        .ok_or_else(|| anyhow!("distance needs the potential surface of a --case"))?;
    let level = match c {
        Some(c) => c,
        None => sys.potential.value(p)?,
    };
    let surface = Surface::new(sys.potential.clone(), level)?;
    let p_on = surface.project(p)?;
    let x_on = surface.project(x)?;
    let d = geodesic_distance(&surface, &p_on, &x_on)?;
    let record = json!({
        "case": sys.name,
        "level": level,
        "p": vec3(&p_on),
        "x": vec3(&x_on),
        "distance": d,
    });
    write_out(out, &render_record(record))?;
    Ok(ExitCode::SUCCESS)
}
