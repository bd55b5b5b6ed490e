use std::path::Path;
use std::process::{Command, Output};

use pvlab::field::{Grid3, ScalarField};
use pvlab::io::{write_snapshot, SnapshotData};
use serde_json::Value;

fn pvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvlab")).args(args).env("PVLAB_THREADS", "2").output().expect("spawn pvlab")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write_config(dir: &Path, name: &str, extra: &str) -> String {
    let path = dir.join(name);
    let text = format!(
        "grid.n = 16\nsolver.t_end = 0.1\nsolver.initial = taylor_green\nmonitor.theta = 1/2\nmonitor.q = 4\noutput.dir = {}\n{extra}",
        dir.join("out").display()
    );
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn exponents_prints_the_split() {
    let out = pvlab(&["exponents", "--theta", "1", "--q", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["beta"], "2/1");
    assert_eq!(v["p"], "8/1");
    assert_eq!(v["absorption_exponent"], "8/1");
    assert_eq!(v["inv_r2"], "1/2");
    assert_eq!(v["r1"], "Unused");
    assert_eq!(v["weighted_delta"], "3/2");
}

#[test]
fn usage_and_io_errors_have_distinct_codes() {
    assert_eq!(pvlab(&["bogus"]).status.code(), Some(2));
    assert_eq!(pvlab(&["exponents", "--theta", "x", "--q", "4"]).status.code(), Some(2));
    assert_eq!(pvlab(&["exponents", "--theta", "1/2", "--q", "2"]).status.code(), Some(2));
    assert_eq!(pvlab(&["norms", "--field", "/nonexistent/f.pvrl", "--p", "2", "--q", "2"]).status.code(), Some(3));
    assert_eq!(pvlab(&["verify", "--config", "/nonexistent/run.cfg"]).status.code(), Some(3));
    let bad = Command::new(env!("CARGO_BIN_EXE_pvlab"))
        .args(["exponents", "--theta", "0", "--q", "4"])
        .env("PVLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_parse_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", "not a key value line\n");
    let out = pvlab(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 7"));
}

#[test]
fn norms_of_a_sine_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid3::torus_2pi(16).unwrap();
    let path = dir.path().join("sine.pvrl");
    write_snapshot(&path, &SnapshotData::Scalar(ScalarField::from_fn(g, |x, _, _| x.sin()))).unwrap();
    let out = pvlab(&["norms", "--field", path.to_str().unwrap(), "--p", "2", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    // ‖sin x‖₂² = |Ω|/2 = 4π³ on the 2π torus.
    let exact = (4.0 * std::f64::consts::PI.powi(3)).sqrt();
    for key in ["value", "lebesgue"] {
        let got = v[key].as_f64().unwrap();
        assert!((got - exact).abs() < 1e-12 * exact, "{key}: {got}");
    }
    let weak = json(&pvlab(&["norms", "--field", path.to_str().unwrap(), "--p", "2", "--q", "inf"]));
    assert!(weak.get("lebesgue").is_none());
    assert!(weak["value"].as_f64().unwrap() <= exact);
}

#[test]
fn simulate_then_monitor_and_refuse_mixed_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", "");
    let sim = pvlab(&["simulate", "--config", &cfg]);
    assert_eq!(sim.status.code(), Some(0), "{}", String::from_utf8_lossy(&sim.stderr));
    let manifest = String::from_utf8(sim.stdout).unwrap().trim().to_owned();
    assert!(Path::new(&manifest).exists());

    let cal = pvlab(&["calibrate", "--config", &cfg]);
    assert_eq!(cal.status.code(), Some(0));
    let registry = String::from_utf8(cal.stdout).unwrap().trim().to_owned();

    let report_dir = dir.path().join("mon");
    let mon = pvlab(&[
        "monitor",
        "--traj",
        &manifest,
        "--theta",
        "1/2",
        "--q",
        "4",
        "--out",
        report_dir.to_str().unwrap(),
        "--registry",
        &registry,
    ]);
    assert_eq!(mon.status.code(), Some(0), "{}", String::from_utf8_lossy(&mon.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(report_dir.join("report.json")).unwrap()).unwrap();
    let csv = std::fs::read_to_string(report_dir.join("report.csv")).unwrap();
    assert_eq!(report["passed"], true);
    assert!(csv.starts_with("t,l4_fourth,ddt_l4,"));

    // A registry calibrated under a different configuration is refused.
    let other = write_config(dir.path(), "other.cfg", "monitor.epsilon = 0.05\n");
    let other_reg = dir.path().join("other_constants.txt");
    assert_eq!(pvlab(&["calibrate", "--config", &other, "--out", other_reg.to_str().unwrap()]).status.code(), Some(0));
    let mixed = pvlab(&[
        "monitor",
        "--traj",
        &manifest,
        "--theta",
        "1/2",
        "--q",
        "4",
        "--out",
        report_dir.to_str().unwrap(),
        "--registry",
        other_reg.to_str().unwrap(),
    ]);
    assert_eq!(mixed.status.code(), Some(2));
    let verify = pvlab(&["verify", "--config", &other, "--traj", &manifest]);
    assert_eq!(verify.status.code(), Some(2));
}
