use std::fs;
use std::process::{Command, Output};

fn jlheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jlheat")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn constants_prints_amplitude() {
    let out = jlheat(&["constants", "--dim", "13", "--exponent", "3"]);
    assert!(out.status.success());
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((record["L"].as_f64().unwrap() - 10f64.sqrt()).abs() < 1e-14);
    assert_eq!(record["lambda1"].as_f64().unwrap(), 4.0);
}

#[test]
fn constants_table_has_header_and_rows() {
    let out = jlheat(&["constants", "--table", "--dim-min", "11", "--dim-max", "20"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 11);
}

#[test]
fn bad_exponent_fails() {
    let out = jlheat(&["constants", "--dim", "13", "--exponent", "1"]);
    assert!(!out.status.success());
}

#[test]
fn verify_filter_runs_one_criterion() {
    let out = jlheat(&["verify", "--filter", "constants"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("exponent-identities"));
    assert!(text.contains("1/1 criteria passed"));
}

#[test]
fn run_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("table.json");
    fs::write(
        &cfg,
        r#"{"name":"table","experiment":{"kind":"constants-table","dim_min":11,"dim_max":20}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = jlheat(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], true);
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"experiment":{"kind":"steady","params":{"dim":13,"p":0.9}}}"#).unwrap();
    let out = jlheat(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("experiment.params.p"));
}

#[test]
fn sphere_identity_of_constant_amplitude_vanishes() {
    let amp = 10f64.sqrt().to_string();
    let out = jlheat(&["blowdown", "sphere-identity", "--preset", "constant", "--amplitude", &amp]);
    assert!(out.status.success());
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!(v.abs() < 1e-10);
}
