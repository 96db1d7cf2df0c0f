use std::path::Path;

use serde_json::{json, Value};
use tessgof::{exit, parse_stat, ExperimentConfig, HarnessError};
use tessgof_core::stats::{StatisticKind, Threshold};

fn base() -> Value {
    json!({
        "schema_version": 1,
        "name": "t",
        "models": [
            { "preset": "bin-vor", "n_cells": 50 },
            { "preset": "fb-vor", "n_cells": 50 }
        ],
        "nulls": ["bin-vor"],
        "statistics": [{ "kind": "area", "threshold": { "quantile": 0.4 } }],
        "n_calibration": 20,
        "n_test": 10,
        "master_seed": 3
    })
}

fn resolve(v: &Value) -> Result<tessgof::Experiment, HarnessError> {
    ExperimentConfig::from_json(&v.to_string())?.resolve()
}

fn config_error(v: &Value) -> String {
    let e = resolve(v).expect_err("config should be rejected");
    assert_eq!(e.exit_code(), exit::CONFIG, "{e}");
    e.to_string()
}

#[test]
fn shipped_configs_resolve() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let exp = ExperimentConfig::load(&path)
            .and_then(|c| c.resolve())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(!exp.models.is_empty());
        seen += 1;
    }
    assert!(seen >= 3);
}

#[test]
fn presets_expand_and_defaults_apply() {
    let exp = resolve(&base()).unwrap();
    assert_eq!(exp.models.len(), 2);
    assert_eq!(exp.models[0].name, "bin-vor");
    assert_eq!(exp.nulls, ["bin-vor"]);
    assert_eq!(exp.alternatives, ["bin-vor", "fb-vor"]);
    assert_eq!(exp.alpha, 0.05);
    assert!(exp.exports.diagrams && exp.exports.densities && !exp.exports.tessellations);
}

#[test]
fn strauss_gamma_above_one_names_gamma() {
    let mut v = base();
    v["models"][1] = json!({
        "name": "repulsive",
        "window": { "edge_length": 1.0, "periodic": true },
        "generator": { "process": "strauss", "n_points": 50, "gamma": 1.5, "r0": 0.1 },
        "tessellation": "voronoi"
    });
    let msg = config_error(&v);
    assert!(msg.contains("gamma"), "{msg}");
    assert!(msg.contains("models[1]"), "{msg}");
}

#[test]
fn malformed_configs_are_rejected() {
    let cases: Vec<(&str, Box<dyn Fn(&mut Value)>)> = vec![
        ("schema", Box::new(|v| v["schema_version"] = json!(2))),
        (
            "preset",
            Box::new(|v| v["models"][0]["preset"] = json!("poisson")),
        ),
        (
            "duplicate",
            Box::new(|v| v["models"][1]["preset"] = json!("bin-vor")),
        ),
        ("nulls", Box::new(|v| v["nulls"] = json!(["nope"]))),
        ("n_calibration", Box::new(|v| v["n_calibration"] = json!(1))),
        ("n_test", Box::new(|v| v["n_test"] = json!(0))),
        ("alpha", Box::new(|v| v["alpha"] = json!(1.5))),
        ("workers", Box::new(|v| v["workers"] = json!(0))),
        (
            "statistics[0]",
            Box::new(|v| v["statistics"][0]["threshold"] = json!({ "quantile": 1.5 })),
        ),
    ];
    for (needle, edit) in cases {
        let mut v = base();
        edit(&mut v);
        let msg = config_error(&v);
        assert!(msg.contains(needle), "{needle}: {msg}");
    }
}

#[test]
fn unknown_fields_and_bad_json_are_config_errors() {
    let mut v = base();
    v["colour"] = json!("blue");
    let e = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
    assert_eq!(e.exit_code(), exit::CONFIG);
    assert!(e.to_string().contains("colour"), "{e}");
    let e = ExperimentConfig::from_json("{ not json").unwrap_err();
    assert_eq!(e.exit_code(), exit::CONFIG);
}

#[test]
fn missing_config_file_is_io() {
    let e = ExperimentConfig::load(Path::new("/nonexistent/config.json")).unwrap_err();
    assert_eq!(e.exit_code(), exit::IO);
}

#[test]
fn hash_ignores_output_dir_and_workers() {
    let h = resolve(&base()).unwrap().hash();
    assert_eq!(h.len(), 64);
    let mut v = base();
    v["output_dir"] = json!("elsewhere");
    v["workers"] = json!(7);
    assert_eq!(resolve(&v).unwrap().hash(), h);
    v["master_seed"] = json!(4);
    assert_ne!(resolve(&v).unwrap().hash(), h);
    let mut v = base();
    v["models"][1]["n_cells"] = json!(51);
    assert_ne!(resolve(&v).unwrap().hash(), h);
}

#[test]
fn statistic_shorthand() {
    let s = parse_stat("area@q0.4").unwrap();
    assert_eq!(s.kind, StatisticKind::Area);
    assert_eq!(s.threshold, Threshold::Quantile(0.4));
    let s = parse_stat("inradius@0.02").unwrap();
    assert_eq!(s.kind, StatisticKind::Inradius);
    assert_eq!(s.threshold, Threshold::Absolute(0.02));
    let s = parse_stat(r#"{"kind": "persistence", "threshold": {"quantile": 0.7}, "q_dim": 1}"#)
        .unwrap();
    assert_eq!(s.kind, StatisticKind::Persistence);
    for bad in ["area", "volume@q0.4", "area@qx", "area@q1.5"] {
        let e = parse_stat(bad).unwrap_err();
        assert_eq!(e.exit_code(), exit::CONFIG, "{bad}");
    }
}
