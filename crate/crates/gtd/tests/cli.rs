//! End-to-end checks of the compiled binary: exit codes, output file
//! handling, format stability, and the interaction-free reduction.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gtd"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = tmp(name);
    fs::write(&path, body).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const IDEAL_CURV: &str = r#"{
  "system": {"system": "ideal-gas", "kappa": 1.0},
  "metric": {"k": -1, "Lambda": "const:-1.0", "representation": "entropy"},
  "grid": {"ranges": [[1.0, 2.0], [1.0, 2.0]], "counts": [6, 6]}
}"#;

const VDW_ZERO_CURV: &str = r#"{
  "system": {"system": "vdw", "kappa": 1.0, "a": 0.0, "b": 0.0},
  "metric": {"k": -1, "Lambda": "const:-1.0", "representation": "entropy"},
  "grid": {"ranges": [[1.0, 2.0], [1.0, 2.0]], "counts": [6, 6]}
}"#;

#[test]
fn interaction_free_limit_is_byte_identical_to_the_simple_system() {
    let cfg_a = write_config("ideal_curv.json", IDEAL_CURV);
    let cfg_b = write_config("vdw_zero_curv.json", VDW_ZERO_CURV);
    let out_a = tmp("ideal_curv.csv");
    let out_b = tmp("vdw_zero_curv.csv");
    run_ok(&["curvature", "--config", cfg_a.to_str().unwrap(), "--out", out_a.to_str().unwrap()]);
    run_ok(&["curvature", "--config", cfg_b.to_str().unwrap(), "--out", out_b.to_str().unwrap()]);
    let a = fs::read(&out_a).unwrap();
    let b = fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "reduced-system scan differs from the simple system");
}

#[test]
fn malformed_json_exits_with_the_usage_code() {
    let cfg = write_config("broken.json", "{ this is not json");
    let out = bin().args(["metric", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_config_key_exits_with_the_usage_code() {
    let cfg = write_config(
        "unknown_key.json",
        r#"{
  "system": {"system": "ideal-gas", "kappa": 1.0},
  "metric": {"k": -1, "Lambda": "const:-1.0", "representation": "entropy"},
  "grid": {"ranges": [[1.0, 2.0], [1.0, 2.0]], "counts": [4, 4]},
  "extra_section": {}
}"#,
    );
    let out = bin().args(["metric", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("extra_section"), "stderr: {err}");
}

#[test]
fn scan_through_an_excluded_volume_exits_with_the_domain_code() {
    let cfg = write_config(
        "domain_violation.json",
        r#"{
  "system": {"system": "vdw", "kappa": 1.0, "a": 0.1, "b": 0.5},
  "metric": {"k": -1, "Lambda": "const:-1.0", "representation": "entropy"},
  "grid": {"ranges": [[1.0, 2.0], [0.2, 2.0]], "counts": [3, 5]}
}"#,
    );
    let out = bin().args(["curvature", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unreachable_boundary_target_exits_with_the_convergence_code() {
    let cfg = write_config(
        "hopeless_shoot.json",
        r#"{
  "system": {"system": "ideal-gas", "kappa": 1.0},
  "metric": {"k": -1, "Lambda": "const:-1.0", "representation": "entropy"},
  "geodesic": {"start": [1.0, 1.0], "end": [1.0, 1000000000.0]},
  "tolerances": {"shoot": 1e-12}
}"#,
    );
    let out = bin().args(["geodesic", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn residual_scan_emits_the_documented_json_shape() {
    let cfg = write_config(
        "ng_shape.json",
        r#"{
  "system": {"system": "ideal-gas", "kappa": 1.0},
  "metric": {"k": -1, "Lambda": "const:-1.0", "representation": "entropy"},
  "grid": {"ranges": [[1.0, 2.0], [1.0, 2.0]], "counts": [3, 3]},
  "output": {"format": "json"}
}"#,
    );
    let out = run_ok(&["ng-check", "--config", cfg.to_str().unwrap()]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = parsed.as_array().expect("top-level array");
    assert_eq!(rows.len(), 9);
    for row in rows {
        let obj = row.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["E", "components", "max_norm"]);
        assert_eq!(obj["components"].as_array().unwrap().len(), 5);
        assert_eq!(obj["max_norm"].as_f64().unwrap(), 0.0);
    }
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("ng-check"), "summary: {summary}");
    assert!(summary.contains("PASS"), "summary: {summary}");
}

#[test]
fn out_flag_writes_the_table_and_keeps_the_summary_on_stdout() {
    let cfg = write_config("metric_out.json", IDEAL_CURV);
    let dest = tmp("metric_table.csv");
    let out = run_ok(&["metric", "--config", cfg.to_str().unwrap(), "--out", dest.to_str().unwrap()]);
    let table = fs::read_to_string(&dest).unwrap();
    let header = table.lines().next().unwrap();
    assert!(header.starts_with("U,V,g_11"), "header: {header}");
    assert_eq!(table.lines().count(), 37);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("metric scan"), "stdout: {stdout}");
    assert!(stdout.contains(dest.to_str().unwrap()), "stdout: {stdout}");
}

#[test]
fn transformation_sweep_reports_every_subset() {
    let cfg = write_config(
        "legendre_sweep.json",
        r#"{
  "system": {"system": "gen-ideal", "kappa": 1.0, "c": 2.0},
  "metric": {"k": 0, "Lambda": "const:1.0", "representation": "entropy"},
  "legendre": {"seed": 11, "samples": 25}
}"#,
    );
    let out = run_ok(&["legendre-check", "--config", cfg.to_str().unwrap()]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = parsed.as_array().unwrap();
    assert_eq!(rows.len(), 4, "expected one row per subset");
    for row in rows {
        assert!(row["max_residual"].as_f64().unwrap() < 1e-9);
        assert_eq!(row["samples"].as_u64().unwrap(), 25);
    }
}

#[test]
fn geodesic_table_matches_the_requested_step_count() {
    let cfg = write_config(
        "geo_count.json",
        r#"{
  "system": {"system": "ideal-gas", "kappa": 1.0},
  "metric": {"k": -1, "Lambda": "const:-1.0", "representation": "entropy"},
  "geodesic": {"start": [1.0, 1.0], "velocity": [1.0, 1.0], "tau_max": 1.0, "step": 0.25}
}"#,
    );
    let out = run_ok(&["geodesic", "--config", cfg.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "tau,U,V,dU,dV,S,cumulative_L");
    assert_eq!(lines.count(), 5);
    let summary = String::from_utf8_lossy(&out.stderr);
    assert!(summary.contains("admissible yes"), "summary: {summary}");
}

#[test]
fn shipped_sample_configs_parse_and_run() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let legendre = root.join("legendre_check.json");
    run_ok(&["legendre-check", "--config", legendre.to_str().unwrap()]);
    let ng = root.join("ideal_gas_ng_check.json");
    run_ok(&["ng-check", "--config", ng.to_str().unwrap()]);
}

#[test]
fn config_written_back_by_the_library_is_accepted_by_the_binary() {
    use gtd::cli::RunConfig;
    let cfg = RunConfig::from_json(IDEAL_CURV).unwrap();
    let path = write_config("roundtrip.json", &cfg.to_json());
    run_ok(&["curvature", "--config", path.to_str().unwrap()]);
}
