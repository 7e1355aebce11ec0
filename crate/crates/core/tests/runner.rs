use std::fs;

use jlheat::runner::{run, run_batch, ExperimentConfig, RunManifest};
use jlheat::Error;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(text).expect("valid config")
}

const TABLE: &str = r#"{"name":"table","experiment":{"kind":"constants-table","dim_min":11,"dim_max":20}}"#;

#[test]
fn constants_table_has_one_row_per_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = run(&config(TABLE), dir.path()).unwrap();
    assert!(manifest.passed, "{:?}", manifest.checks);
    let csv = fs::read_to_string(dir.path().join("constants.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let steady = r#"{"name":"s","experiment":{"kind":"steady","params":{"dim":13,"p":3.0}}}"#;
    for text in [TABLE, steady] {
        let cfg = config(text);
        let ma = run(&cfg, a.path()).unwrap();
        let mb = run(&cfg, b.path()).unwrap();
        assert_eq!(ma.outputs, mb.outputs);
        for name in ma.outputs.iter().filter(|n| n.ends_with(".csv")) {
            let x = fs::read(a.path().join(name)).unwrap();
            let y = fs::read(b.path().join(name)).unwrap();
            assert_eq!(x, y, "{name} differs");
        }
    }
}

#[test]
fn manifest_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = run(&config(TABLE), dir.path()).unwrap();
    let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let back: RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(back, manifest);
    assert!(back.outputs.contains(&"manifest.json".to_string()));
}

#[test]
fn invalid_exponent_reports_field_path() {
    let err = ExperimentConfig::from_json(r#"{"experiment":{"kind":"steady","params":{"dim":13,"p":1.0}}}"#)
        .unwrap_err();
    match err {
        Error::ConfigInvalid { path, .. } => assert_eq!(path, "experiment.params.p"),
        other => panic!("expected ConfigInvalid, got {other}"),
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let err = ExperimentConfig::from_json(r#"{"experiment":{"kind":"interp","dim":13,"radii":[1],"bogus":1}}"#)
        .unwrap_err();
    assert!(matches!(err, Error::ConfigInvalid { .. }));
}

#[test]
fn batch_runs_land_in_named_directories() {
    let root = tempfile::tempdir().unwrap();
    let cfgs = vec![
        config(TABLE),
        config(r#"{"name":"bd","experiment":{"kind":"blowdown","params":{"dim":13,"p":3.0},"scales":[2,4,8]}}"#),
    ];
    let results = run_batch(&cfgs, root.path());
    for r in &results {
        r.as_ref().unwrap();
    }
    assert!(root.path().join("table/constants.csv").exists());
    let bd = fs::read_to_string(root.path().join("bd/blowdown.csv")).unwrap();
    assert_eq!(bd.lines().count(), 4);
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let items = match value {
            serde_json::Value::Array(items) => items,
            single => vec![single],
        };
        for item in items {
            ExperimentConfig::from_json(&item.to_string()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
