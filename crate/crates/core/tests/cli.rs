use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qpolar(args: &[&str], dir: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qpolar"));
    cmd.args(args).current_dir(dir);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr_json(o: &Output) -> Value {
    let s = String::from_utf8_lossy(&o.stderr);
    let line = s.lines().rev().find(|l| l.starts_with('{')).expect("error json on stderr");
    serde_json::from_str(line).unwrap()
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    serde_json::from_value(v["re"].clone()).unwrap()
}

#[test]
fn decompose_identity() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "id.json", r#"{"kraus": [{"re": [[1, 0], [0, 1]]}]}"#);
    let o = qpolar(&["decompose", "--in", &p], dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((r["metrics"]["phi"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((r["metrics"]["upsilon"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let v = matrix(&r["polar"]["v"]);
    assert!((v[0][0] - 1.0).abs() < 1e-12 && v[0][1].abs() < 1e-12 && (v[1][1] - 1.0).abs() < 1e-12);
}

#[test]
fn decompose_amplitude_damping() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "ad.json", r#"{"family": "amplitude_damping", "dim": 2, "params": {"gamma": 0.19}}"#);
    let o = qpolar(&["decompose", "--in", &p], dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let lk = matrix(&r["lk"]);
    assert!((lk[0][0] - 1.0).abs() < 1e-12 && (lk[1][1] - 0.9).abs() < 1e-12);
    assert!(lk[0][1].abs() < 1e-12 && lk[1][0].abs() < 1e-12);
    assert_eq!(r["decoherent"], Value::Bool(true));
}

#[test]
fn malformed_json_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", "{\"kraus\": [");
    let o = qpolar(&["decompose", "--in", &p], dir.path(), &[]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr_json(&o)["exit_code"], 2);
    let p = write(dir.path(), "ragged.json", r#"{"kraus": [{"re": [[1, 0], [0]]}]}"#);
    assert_eq!(code(&qpolar(&["metrics", "--in", &p], dir.path(), &[])), 2);
}

#[test]
fn non_cptp_is_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "ntp.json", r#"{"kraus": [{"re": [[1, 0], [0, 0.5]]}]}"#);
    let o = qpolar(&["decompose", "--in", &p], dir.path(), &[]);
    assert_eq!(code(&o), 3);
    assert_eq!(stderr_json(&o)["error"], "NotTP");
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&qpolar(&["verify", "lemmas", "--trials", "0"], dir.path(), &[])), 64);
    assert_eq!(code(&qpolar(&["frobnicate"], dir.path(), &[])), 64);
    assert_eq!(code(&qpolar(&["decompose"], dir.path(), &[])), 64);
    assert_eq!(code(&qpolar(&["--help"], dir.path(), &[])), 0);
}

#[test]
fn verify_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpolar(&["verify", "lemmas", "--dim", "2", "--trials", "50", "--seed", "42", "--out", "v.csv"], dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("v.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "case_id,theorem,observed,lower,upper,slack,holds");
    assert_eq!(csv.lines().count(), 101);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 42);
    assert_eq!(m["command"], "verify lemmas");
    assert_eq!(m["config"]["trials"], 50);
    assert!(m["wall_clock_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn verify_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &str| {
        let o = qpolar(
            &["verify", "all", "--dim", "2", "--trials", "4", "--seed", "7", "--out", out],
            dir.path(),
            &[("RAYON_NUM_THREADS", threads)],
        );
        assert!(code(&o) <= 1);
        std::fs::read(dir.path().join(out)).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("4", "b.csv");
    let c = run("4", "c.csv");
    assert_eq!(a, b);
    assert_eq!(b, c);
}

#[test]
fn sweep_rotation_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "sweep.json",
        r#"{"series": "rot", "element": {"family": "rotation", "dim": 2, "params": {"theta": 0.1}}, "depth": 3, "metrics": ["phi"]}"#,
    );
    let o = qpolar(&["sweep", "--in", &p, "--out", "s.csv"], dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(last[..2], ["rot", "3"]);
    let phi: f64 = last[2].parse().unwrap();
    assert!((phi - 0.3f64.cos().powi(2)).abs() < 1e-12);
    assert!(dir.path().join("s.csv.manifest.json").exists());
}

#[test]
fn sweep_leaving_regime_exits_3_with_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "sweep.json",
        r#"{"series": "rot", "element": {"family": "rotation", "dim": 2, "params": {"theta": 0.2}}, "depth": 10}"#,
    );
    let o = qpolar(&["sweep", "--in", &p], dir.path(), &[]);
    assert_eq!(code(&o), 3);
    let csv = String::from_utf8(o.stdout.clone()).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().last().unwrap().ends_with(",false"));
    assert_eq!(stderr_json(&o)["exit_code"], 3);
}

#[test]
fn fig3_preset_records_interpretation() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpolar(&["sweep", "--preset", "fig3", "--depth", "50", "--out", "f3.csv"], dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("f3.csv.manifest.json")).unwrap()).unwrap();
    assert!(m["notes"][0].as_str().unwrap().contains("infidelity"));
    let csv = std::fs::read_to_string(dir.path().join("f3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 151);
}

#[test]
fn fig2_preset_summary_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpolar(&["sweep", "--preset", "fig2", "--dim", "64", "--seed", "1"], dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout.clone()).unwrap();
    assert_eq!(csv.lines().count(), 66);
    let summary: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(summary[0], "summary");
    assert_eq!(summary[8..], ["false", "true"]);
}

#[test]
fn compose_reports_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let el = r#"{"family": "depolarizing", "dim": 2, "params": {"p": 0.99}}"#;
    let p = write(dir.path(), "c.json", &format!(r#"{{"channels": [{el}, {el}, {el}]}}"#));
    let o = qpolar(&["compose", "--in", &p], dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["depth"], 3);
    assert!(r["bounds"].as_array().unwrap().len() >= 5);
}
