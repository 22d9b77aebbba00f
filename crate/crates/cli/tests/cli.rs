//! End-to-end tests running the installed binary: exit codes, output
//! formats, config merging, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamframe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    let idx = header
        .iter()
        .position(|h| *h == name)
        .unwrap_or_else(|| panic!("column {name} in {header:?}"));
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn fixed_step_flow_is_byte_identical() {
    let args = [
        "flow",
        "--case",
        "euler-like",
        "--x0",
        "0.9,0.5,0.7",
        "--t",
        "0,1",
        "--fixed-step",
        "0.05",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.contains(&b'\r'), "LF line endings only");
}

#[test]
fn stagnation_exits_with_usage_code() {
    let out = run(&["analyze", "--field", "0,0,0", "--at", "0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stagnation"));
}

#[test]
fn unknown_case_exits_with_usage_code() {
    let out = run(&["verify", "--case", "unknown"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn case_and_field_conflict() {
    let out = run(&["analyze", "--case", "sphere", "--field", "x,y,z"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_reports_frame_and_case() {
    let out = run(&["analyze", "--case", "euler-like", "--at", "1,1,0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["case"], "curl-transverse");
    let t: Vec<f64> = v["t"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((t[0]).abs() < 1e-12 && (t[1]).abs() < 1e-12 && (t[2] - 1.0).abs() < 1e-12);
}

#[test]
fn sphere_distance_matches_arc_length() {
    let out = run(&["distance", "--case", "sphere", "--p", "0,0,1", "--x", "1,0,0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let d = v["distance"].as_f64().unwrap();
    assert!((d - std::f64::consts::FRAC_PI_2).abs() < 1e-6, "d = {d}");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "case = \"euler-like\"\nat = \"1,1,0\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let out = run(&["analyze", "--config", cfg]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["at"].as_array().unwrap()[2].as_f64(), Some(0.0));

    let out = run(&["analyze", "--config", cfg, "--at", "0.5,0.5,0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["speed"].as_f64(), Some(0.25));
}

#[test]
fn riccati_csv_schema_and_residuals() {
    let out = run(&[
        "riccati",
        "--case",
        "euler-like",
        "--x0",
        "0.9,0.5,0.7",
        "--s",
        "0,0.4",
        "--mu0",
        "0.2,1.2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "s,x,y,z,psi1,psi2,mu1,mu2,logA1,logA2,jacobi1,jacobi2"
    );
    for name in ["jacobi1", "jacobi2"] {
        let worst = csv_column(&text, name)
            .into_iter()
            .fold(0.0f64, |m, r| m.max(r.abs()));
        assert!(worst < 1e-3, "{name} residual {worst:.2e}");
    }
}

#[test]
fn geodesic_stays_geodesic() {
    let out = run(&[
        "geodesic",
        "--case",
        "sphere",
        "--c",
        "0.5",
        "--from",
        "0.6,-0.3,0.74",
        "--s",
        "0,2",
    ]);
    assert!(out.status.success());
    let worst = csv_column(&stdout(&out), "kappa_g")
        .into_iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    assert!(worst < 1e-6, "kappa_g {worst:.2e}");
}

#[test]
fn verify_sphere_passes_every_check() {
    let out = run(&["verify", "--case", "sphere"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().count() >= 4);
    assert!(text.lines().all(|l| l.starts_with("[PASS]")), "{text}");
}

#[test]
fn out_flag_writes_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = run(&[
        "flow",
        "--case",
        "sphere",
        "--t",
        "0,1",
        "--fixed-step",
        "0.25",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    assert!(text.starts_with("t,x,y,z,s,"));
    assert_eq!(text.lines().count(), 6);
}
