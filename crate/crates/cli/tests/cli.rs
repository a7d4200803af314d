use std::f64::consts::LN_2;
use std::io::Write;
use std::process::{Command, Output};

use gepi_core::{binary_entropy, f_2n, f_gk, star, BernoulliParam};
use serde_json::Value;

fn gepi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gepi"))
        .args(args)
        .env_remove("GEPI_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn single_value(args: &[&str]) -> f64 {
    let o = gepi(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o).trim().parse().unwrap()
}

fn spec_file(json: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

fn h(p: f64) -> f64 {
    binary_entropy(p).unwrap()
}

fn conv(a: f64, b: f64) -> f64 {
    star(BernoulliParam::new(a).unwrap(), BernoulliParam::new(b).unwrap()).get()
}

#[test]
fn eval_pair_matches_closed_form() {
    let v = single_value(&["eval", "--group", "z4", "--x", "0.3", "--y", "0.4"]);
    assert!((v - f_2n(2, 0.3, 0.4).unwrap()).abs() < 1e-11);
}

#[test]
fn eval_fold_matches_closed_form() {
    let v = single_value(&["eval", "--group", "z8", "--xs", "0.2,0.5,0.4"]);
    assert!((v - f_gk(3, &[0.2, 0.5, 0.4]).unwrap()).abs() < 1e-11);
}

#[test]
fn eval_trivial_and_direct_sum() {
    assert_eq!(single_value(&["eval", "--group", "z2", "--x", "0", "--y", "0.5"]), 0.5);
    let a = single_value(&["eval", "--group", "z2xz2", "--x", "0.9", "--y", "0.2"]);
    let b = single_value(&["eval", "--group", "z4", "--x", "0.9", "--y", "0.2"]);
    assert!((a - b).abs() < 1e-11);
}

#[test]
fn eval_in_bits() {
    assert_eq!(single_value(&["--unit", "bits", "eval", "--group", "z2", "--x", "0", "--y", "0.5"]), 0.5);
    let bits = single_value(&["--unit", "bits", "eval", "--group", "z4", "--x", "1", "--y", "1"]);
    assert!((bits - f_2n(2, LN_2, LN_2).unwrap() / LN_2).abs() < 1e-11);
}

#[test]
fn eval_errors_exit_2() {
    for args in [
        &["eval", "--group", "z3", "--x", "0.1", "--y", "0.1"][..],
        &["eval", "--group", "z4", "--x", "5", "--y", "0.1"],
        &["eval", "--group", "q4", "--x", "0.1", "--y", "0.1"],
        &["eval", "--group", "z4", "--x", "0.1"],
        &["frobnicate"],
    ] {
        let o = gepi(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn eval_json() {
    let o = gepi(&["--format", "json", "eval", "--group", "z4", "--x", "0.3", "--y", "0.4"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["group"], "z4");
    assert!((v["value"].as_f64().unwrap() - f_2n(2, 0.3, 0.4).unwrap()).abs() < 1e-11);
}

#[test]
fn oracle_csv_is_deterministic_and_close() {
    let args = ["oracle", "--group", "z4", "--points", "4", "--restarts", "2"];
    let a = gepi(&args);
    assert!(a.status.success());
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,closed_form,numeric,gap"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 16);
    for r in &rows {
        assert!((r[2] - f_2n(2, r[0], r[1]).unwrap()).abs() < 1e-11);
        assert!(r[4].abs() <= 2e-3);
    }
    assert!(String::from_utf8_lossy(&a.stderr).contains("max |gap|"));

    let b = gepi(&["--sequential", "oracle", "--group", "z4", "--points", "4", "--restarts", "2"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn oracle_without_closed_form() {
    let o = gepi(&["oracle", "--group", "z3", "--points", "2", "--restarts", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let first = text.lines().nth(1).unwrap();
    assert_eq!(first, "0,0,,0,");
}

#[test]
fn region_helper_binary() {
    let spec = spec_file(r#"{"group": "z2", "p_z": ["0.9", "0.1"]}"#);
    let path = spec.path().to_str().unwrap();
    let o = gepi(&["region", "--kind", "helper", "--spec", path, "--alpha-points", "11"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,r1,r2,clamped,equality_residual"));
    for l in lines {
        let c: Vec<&str> = l.split(',').collect();
        let a: f64 = c[0].parse().unwrap();
        let r1: f64 = c[1].parse().unwrap();
        let r2: f64 = c[2].parse().unwrap();
        assert!((r1 - h(conv(a, 0.1))).abs() < 1e-11);
        assert!((r2 - (LN_2 - h(a))).abs() < 1e-11);
    }
    let bits = gepi(&["--unit", "bits", "region", "--kind", "helper", "--spec", path, "--alpha-points", "11"]);
    let row: Vec<f64> = stdout(&bits).lines().nth(11).unwrap().split(',')
        .filter_map(|c| c.parse().ok()).collect();
    assert_eq!(row[0], 0.5);
    assert!((row[1] - h(0.5) / LN_2).abs() < 1e-11);
}

#[test]
fn region_broadcast_gaussian_json() {
    let spec = spec_file(
        r#"{"group": {"cyclic_orders": [4]}, "p_z1": [0.45, 0.05, 0.45, 0.05], "p_z2": [0.35, 0.15, 0.35, 0.15]}"#,
    );
    let o = gepi(&[
        "--format", "json", "region", "--kind", "broadcast-gaussian",
        "--spec", spec.path().to_str().unwrap(), "--alpha-points", "21",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 21);
    assert!(points.iter().all(|p| p["equality_residual"].as_f64().unwrap().abs() <= 1e-9));
}

#[test]
fn region_spec_errors() {
    let missing = spec_file(r#"{"group": "z4", "p_z1": [0.25, 0.25, 0.25, 0.25]}"#);
    let o = gepi(&["region", "--kind", "broadcast", "--spec", missing.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let odd = spec_file(r#"{"group": "z3", "p_z": [0.5, 0.25, 0.25]}"#);
    let o = gepi(&["region", "--kind", "helper", "--spec", odd.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_lemmas_pass() {
    let o = gepi(&["check", "--kind", "lemmas", "--grid-size", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["claims"].as_array().unwrap().len(), 8);
    assert!(String::from_utf8_lossy(&o.stderr).contains("PASS"));
}

#[test]
fn check_mgl_scalar_and_vector() {
    let o = gepi(&["check", "--kind", "mgl-scalar", "--trials", "500", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["min_slack"].as_f64().unwrap() >= -1e-9);
    assert_eq!(v["trials"], 500);

    let o = gepi(&["check", "--kind", "mgl-vector", "--trials", "40", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let o = gepi(&["check", "--kind", "mgl-vector", "--group", "z4,z8"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_output_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (p, threads) in [(&a, "1"), (&b, "3")] {
        let o = Command::new(env!("CARGO_BIN_EXE_gepi"))
            .args(["check", "--kind", "mgl-scalar", "--trials", "200", "--output", p.to_str().unwrap()])
            .env("GEPI_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn check_convexity_small() {
    let o = gepi(&[
        "check", "--kind", "convexity", "--group", "z2", "--resolution", "12",
        "--fixed-points", "2", "--restarts", "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["label"].as_str().unwrap().contains("not a proof"));
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn check_convexity_z3_default_is_clean() {
    let o = gepi(&["check", "--kind", "convexity", "--group", "z3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn region_broadcast_readme_example() {
    let spec = spec_file(
        r#"{"group": "z4", "p_z1": [0.7, 0.1, 0.15, 0.05], "p_z2_tilde": ["0.4", "0.1", "0.4", "0.1"]}"#,
    );
    let o = gepi(&["region", "--kind", "broadcast", "--spec", spec.path().to_str().unwrap(), "--alpha-points", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 6);
}

#[test]
fn check_rejects_nonpositive_tolerance() {
    let o = gepi(&["check", "--kind", "convexity", "--tolerance", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
