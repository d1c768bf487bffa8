use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn write_config(dir: &Path, name: &str, config: &Value) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

fn run(config: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylspec"))
        .arg("run")
        .arg(config)
        .args(extra)
        .env("CYLSPEC_JOBS", "2")
        .output()
        .unwrap()
}

fn unit_square(task: &str, epsilon: Value, e_max: f64, report: &str) -> Value {
    json!({
        "schema_version": 1,
        "cross_section": {"kind": "rectangle", "width": 1.0, "height": 1.0},
        "profile": {"epsilon": epsilon, "mu": {"family": "constant", "value": 1.0}},
        "task": task,
        "numerics": {"e_max": e_max},
        "outputs": {"report_path": report, "csv_dir": "csv"}
    })
}

fn constant(v: f64) -> Value {
    json!({"family": "constant", "value": v})
}

#[test]
fn homogeneous_square_has_gap_pi() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &unit_square("stabilizing_analysis", constant(1.0), 50.0, "r.json"));
    let out = run(&cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let gap = report["spectrum"]["central_gap"].as_array().unwrap();
    let pi = std::f64::consts::PI;
    assert!((gap[0].as_f64().unwrap() + pi).abs() < 1e-6);
    assert!((gap[1].as_f64().unwrap() - pi).abs() < 1e-6);
    let first = &report["spectrum"]["maxwell"]["intervals"].as_array().unwrap();
    let lowest_positive = first
        .iter()
        .map(|iv| iv[0].as_f64().unwrap())
        .filter(|lo| *lo > 0.0)
        .fold(f64::INFINITY, f64::min);
    assert!((lowest_positive - pi).abs() < 1e-6);
    assert!(dir.path().join("csv/bound_states_el1.csv").exists());
}

#[test]
fn mismatched_task_exits_2_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &unit_square("periodic_analysis", constant(1.0), 50.0, "r.json"));
    let out = run(&cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("task/profile mismatch"));
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = unit_square("stabilizing_analysis", constant(1.0), -1.0, "r.json");
    let cfg = write_config(dir.path(), "neg.json", &c);
    assert_eq!(run(&cfg, &[]).status.code(), Some(2));

    c["numerics"]["e_max"] = json!(10.0);
    c["schema_version"] = json!(7);
    let cfg = write_config(dir.path(), "schema.json", &c);
    assert_eq!(run(&cfg, &[]).status.code(), Some(2));

    c["schema_version"] = json!(1);
    c["profile"]["epsilon"] = constant(-1.0);
    let cfg = write_config(dir.path(), "eps.json", &c);
    assert_eq!(run(&cfg, &[]).status.code(), Some(2));

    c["profile"]["epsilon"] = constant(1.0);
    c["unknown_field"] = json!(true);
    let cfg = write_config(dir.path(), "unknown.json", &c);
    assert_eq!(run(&cfg, &[]).status.code(), Some(2));

    assert_eq!(run(&dir.path().join("missing.json"), &[]).status.code(), Some(2));
}

#[test]
fn oracle_check_on_sech2_bump() {
    let dir = tempfile::tempdir().unwrap();
    let eps = json!({"family": "sech2_bump", "base": 1.0, "amplitude": 0.5, "center": 0.0, "width": 1.0});
    let mut c = unit_square("oracle_check", eps, 25.0, "r.json");
    c["oracle"] = json!({"mode_constants": [10.0]});
    let cfg = write_config(dir.path(), "c.json", &c);
    let out = run(&cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let oracle = &report["oracle"];
    assert_eq!(oracle["rows"].as_array().unwrap().len(), 5);
    assert!(oracle["max_relative_deviation"].as_f64().unwrap() <= 1e-3);
    assert_eq!(oracle["passed"], json!(true));
    let table = fs::read_to_string(dir.path().join("csv/oracle.csv")).unwrap();
    assert_eq!(table.lines().count(), 6);
}

#[test]
fn report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let eps = json!({"family": "gaussian_bump", "base": 1.0, "amplitude": 0.4, "center": 0.0, "width": 1.0});
    let a = write_config(dir.path(), "a.json", &unit_square("stabilizing_analysis", eps.clone(), 40.0, "a.out.json"));
    let b = write_config(dir.path(), "b.json", &unit_square("stabilizing_analysis", eps, 40.0, "b.out.json"));
    assert!(run(&a, &["--jobs", "1"]).status.success());
    assert!(run(&b, &["--jobs", "3", "--dump-potentials"]).status.success());
    let ra = fs::read(dir.path().join("a.out.json")).unwrap();
    let rb = fs::read(dir.path().join("b.out.json")).unwrap();
    assert_eq!(ra, rb);
    assert!(dir.path().join("csv/potential_el1.csv").exists());
}

#[test]
fn periodic_run_writes_band_tables_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let eps = json!({"family": "cosine_periodic", "mean": 1.0, "amplitude": 0.3, "period": 1.0});
    let cfg = write_config(dir.path(), "c.json", &unit_square("periodic_analysis", eps, 60.0, "r.json"));
    let out = run(&cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(report["finite_gap_certificate"]["k"].as_f64().unwrap() > 0.0);
    let bands = fs::read_to_string(dir.path().join("csv/bands_el1.csv")).unwrap();
    assert!(bands.starts_with("index,lower_edge,upper_edge,truncated"));
}

#[test]
fn synthetic_lists_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let d: Vec<String> = (1..=40).map(|k| format!("{}", (k * k) as f64 * 10.0)).collect();
    let n: Vec<String> = (0..40).map(|k| format!("{}", (k * k) as f64 * 8.0)).collect();
    fs::write(dir.path().join("d.txt"), d.join("\n")).unwrap();
    fs::write(dir.path().join("n.txt"), n.join("\n")).unwrap();
    let mut c = unit_square("stabilizing_analysis", constant(1.0), 30.0, "r.json");
    c["cross_section"] = json!({"dirichlet_file": "d.txt", "neumann_file": "n.txt", "boundary_components": 2});
    let cfg = write_config(dir.path(), "c.json", &c);
    let out = run(&cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["spectrum"]["central_gap"], Value::Null);
}
