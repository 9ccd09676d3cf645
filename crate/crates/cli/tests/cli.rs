use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn relmech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relmech"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

const LORENTZ: &str = r#"{
  "metric": "minkowski",
  "force": {"type": "lorentz", "F": [["0", "0", "0"], ["0.5", "0"], ["0"]]},
  "initial": {"x": [0, 1, 0, 0], "xdot": [1.4142135623730951, 0, 1, 0]},
  "t_span": [0, 3.141592653589793],
  "tolerances": {"rel": 1e-12, "abs": 1e-14}
}"#;

#[test]
fn integrate_lorentz_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", LORENTZ);
    let out_dir = dir.path().join("out");
    let v = stdout_json(&relmech(&[
        "integrate",
        "--scenario",
        &sc,
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]));
    let x: Vec<f64> = v["final_x"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_f64().unwrap())
        .collect();
    let pi = std::f64::consts::PI;
    assert!((x[0] - 2f64.sqrt() * pi).abs() < 1e-8);
    assert!((x[1] + 1.0).abs() < 1e-8 && x[2].abs() < 1e-8);
    assert!((v["duration"].as_f64().unwrap() - pi).abs() < 1e-9);
    assert_eq!(v["strictly_relativistic"], true);

    let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "t,x0,x1,x2,x3,xdot0,xdot1,xdot2,xdot3,T,theta_dot,tau_cum"
    );
    let summary: Value = serde_json::from_slice(&std::fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary, v);
}

#[test]
fn flat_unit_speed_tau() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        dir.path(),
        "flat.json",
        r#"{"metric": "euclidean", "force": {"type": "zero"},
            "initial": {"x": [0, 0, 0], "xdot": [0, 0.6, 0.8]}, "t_span": [1, 4]}"#,
    );
    relmech(&[
        "integrate",
        "--scenario",
        &sc,
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let tau: f64 = csv.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((tau - 3.0).abs() < 1e-9);
}

#[test]
fn conservative_scenario_not_strict() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        dir.path(),
        "u.json",
        r#"{"metric": "minkowski", "force": {"type": "exact", "potential": "0.5*(x0^2)"},
            "initial": {"x": [1, 0, 0, 0], "xdot": [1, 0, 0, 0]}, "t_span": [0, 1],
            "outputs": ["summary"]}"#,
    );
    let v = stdout_json(&relmech(&[
        "integrate",
        "--scenario",
        &sc,
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]));
    assert_eq!(v["strictly_relativistic"], false);
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn check_and_correct() {
    let dir = tempfile::tempdir().unwrap();
    let lorentz = write(dir.path(), "l.json", LORENTZ);
    let v = stdout_json(&relmech(&["check", "--scenario", &lorentz, "--samples", "200"]));
    assert_eq!(v["is_contact"], true);

    let exact = write(
        dir.path(),
        "e.json",
        r#"{"metric": "minkowski", "force": {"type": "exact", "potential": "x0"},
            "initial": {"x": [0, 0, 0, 0], "xdot": [1.2, 0.3, 0, 0]}, "t_span": [0, 1]}"#,
    );
    let v = stdout_json(&relmech(&["check", "--scenario", &exact, "--samples", "200"]));
    assert_eq!(v["is_contact"], false);
    let v = stdout_json(&relmech(&["correct", "--scenario", &exact, "--samples", "200"]));
    assert_eq!(v["after"]["is_contact"], true);
    assert!(v["energy_drift_after"].as_f64().unwrap() < 1e-8);

    let v = stdout_json(&relmech(&["correct", "--scenario", &lorentz, "--samples", "200"]));
    assert_eq!(v["unchanged"], true);
}

#[test]
fn paradox_modes() {
    let v = stdout_json(&relmech(&["paradox", "--eta", "1", "--mode", "closed"]));
    assert!((v["mismatch"].as_f64().unwrap() - 0.825_674_516_916_715).abs() < 1e-12);
    let w = stdout_json(&relmech(&["paradox", "--mode", "integrated"]));
    assert!((w["mismatch"].as_f64().unwrap() - 0.825_674_516_916_715).abs() < 1e-6);
    let z = stdout_json(&relmech(&["paradox", "--eta", "0"]));
    assert_eq!(z["mismatch"].as_f64().unwrap(), 0.0);

    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout_json(&relmech(&["paradox", "--out-dir", d, "--s", "1.5"]));
    assert!(dir.path().join("report.json").exists() && dir.path().join("curves.csv").exists());
}

#[test]
fn demo_writes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("demo");
    let v = stdout_json(&relmech(&["demo", "--out-dir", d.to_str().unwrap()]));
    assert!(v["paradox"]["mismatch"].as_f64().unwrap() > 0.8);
    for f in [
        "charged.json",
        "neutral.json",
        "demo.json",
        "neutral/trajectory.csv",
        "paradox/curves.csv",
    ] {
        assert!(d.join(f).exists(), "{f}");
    }
}

#[test]
fn exit_codes_and_error_payloads() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"metric": "minkowski""#);
    let out = relmech(&["integrate", "--scenario", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "ScenarioJson");

    let expr = write(
        dir.path(),
        "expr.json",
        r#"{"metric": "euclidean", "force": {"type": "exact", "potential": "2*(3+"},
            "initial": {"x": [0], "xdot": [1]}, "t_span": [0, 1]}"#,
    );
    let out = relmech(&["integrate", "--scenario", &expr]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "ParseError");

    let missing = relmech(&[
        "integrate",
        "--scenario",
        dir.path().join("nope.json").to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(1));
    stderr_json(&missing);

    // xddot = 2 x^3 with x(0) = 1, xdot(0) = 1 blows up at t = 1
    let blowup = write(
        dir.path(),
        "blow.json",
        r#"{"metric": "euclidean", "force": {"type": "exact", "potential": "-0.5*x0^4"},
            "initial": {"x": [1], "xdot": [1]}, "t_span": [0, 2]}"#,
    );
    let out = relmech(&[
        "integrate",
        "--scenario",
        &blowup,
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["exit_code"], 2);

    let out = relmech(&["paradox", "--s", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = relmech(&["paradox", "--out-dir", dir.path().to_str().unwrap(), "--s", "4"]);
    assert_eq!(out.status.code(), Some(2));

    let out = relmech(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "Usage");
    let out = relmech(&["paradox", "--mode", "sideways"]);
    assert_eq!(out.status.code(), Some(1));
}
