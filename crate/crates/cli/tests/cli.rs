//! End-to-end tests of the `multitime` binary: exit codes, determinism,
//! output formats, and the shipped sample configurations.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_multitime")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(binary()).args(args).output().expect("binary runs")
}

fn run_config(name: &str, extra: &[&str]) -> Output {
    let config = configs_dir().join(name);
    let mut args = vec!["--config".to_string(), config.display().to_string()];
    args.extend(extra.iter().map(|s| s.to_string()));
    Command::new(binary()).args(&args).output().expect("binary runs")
}

fn strip_timestamp(text: &str) -> String {
    text.lines().filter(|line| !line.contains("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn interaction_discrepancy_reports_eleven_twentyfourths() {
    let out = run_config("interaction-discrepancy.json", &[]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], serde_json::Value::Bool(true));
    let closed = doc["results"]["closed_form"].as_f64().unwrap();
    assert!((closed - 11.0 / 24.0).abs() < 1e-12, "{closed}");
}

#[test]
fn staircase_invariance_enumerates_six_paths() {
    let out = run_config("staircase-invariance.json", &[]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["results"]["path_count"].as_u64(), Some(6));
    assert!(doc["results"]["max_pairwise_l2"].as_f64().unwrap() < 1e-10);
    assert_eq!(doc["pass"], serde_json::Value::Bool(true));
}

#[test]
fn every_sample_config_passes() {
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map(|e| e == "json") != Some(true) {
            continue;
        }
        let out = run(&["--config", &path.display().to_string()]);
        assert!(
            out.status.success(),
            "{} failed: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();

    let not_json = dir.path().join("broken.json");
    std::fs::write(&not_json, "{ not json").unwrap();
    let out = run(&["--config", &not_json.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid config"));

    // Unknown keys are schema violations.
    let unknown_key = dir.path().join("unknown.json");
    std::fs::write(
        &unknown_key,
        r#"{"experiment": "kernel-eval", "params": {"kernel": {"type": "free", "mass": 1.0},
            "q_f": 1.0, "t_f": 1.0, "q_i": 0.0, "t_i": 0.0, "surprise": 7}}"#,
    )
    .unwrap();
    let out = run(&["--config", &unknown_key.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown experiment kinds too.
    let unknown_kind = dir.path().join("kind.json");
    std::fs::write(&unknown_kind, r#"{"experiment": "frobnicate", "params": {}}"#).unwrap();
    let out = run(&["--config", &unknown_kind.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("nope.json");
    let out = run(&["--config", &missing.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // A coupled loop cannot return the field at this tolerance.
    let config = dir.path().join("coupled-loop.json");
    std::fs::write(
        &config,
        r#"{"experiment": "loop-check", "params": {
            "path": "1:+1,2:+1,1:-1,2:-1",
            "dynamics": {"mass1": 1.0, "mass2": 1.0, "coupling": 1.0},
            "tolerance": 1e-10,
            "expect": "trivial"}}"#,
    )
    .unwrap();
    let out = run(&["--config", &config.display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], serde_json::Value::Bool(false));
    // The same loop is genuinely nontrivial.
    assert!(doc["results"]["l2_deviation"].as_f64().unwrap() > 1e-3);
}

#[test]
fn numeric_failure_exits_one_with_machine_readable_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad-ladder.json");
    // An increasing epsilon ladder violates the quadrature contract.
    std::fs::write(
        &config,
        r#"{"experiment": "compose-check", "params": {
            "kernel": {"type": "free", "mass": 1.0},
            "q_i": 0.0, "t_i": 0.0, "t_mid": 0.5, "q_f": 1.0, "t_f": 1.0,
            "tolerance": 1e-6,
            "quadrature": {"epsilon_ladder": [1e-3, 1e-2, 1e-1]}}}"#,
    )
    .unwrap();
    let out = run(&["--config", &config.display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["error"]["code"], serde_json::Value::String("numeric-failure".into()));
    assert_eq!(doc["pass"], serde_json::Value::Bool(false));
}

#[test]
fn identical_configs_give_byte_identical_output_modulo_timestamp() {
    let first = run_config("compose-check.json", &[]);
    let second = run_config("compose-check.json", &[]);
    assert!(first.status.success() && second.status.success());
    let a = strip_timestamp(&String::from_utf8(first.stdout).unwrap());
    let b = strip_timestamp(&String::from_utf8(second.stdout).unwrap());
    assert_eq!(a, b);
    assert!(!a.is_empty());
}

#[test]
fn csv_output_has_the_documented_shape() {
    let out = run_config("poisson-residual.json", &["--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "kind,name,value,threshold,comparison,pass");
    for line in lines {
        assert_eq!(line.split(',').count(), 6, "bad row: {line}");
    }
    assert!(text.contains("result,residual,"));
    assert!(text.contains("check,residual matches expected value"));
}

#[test]
fn seed_is_echoed_and_out_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("result.json");
    let out = run_config(
        "kernel-eval.json",
        &["--seed", "42", "--out", &out_path.display().to_string(), "--verbose"],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[pass]"));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["seed"].as_u64(), Some(42));
}

#[test]
fn loop_check_dumps_a_loadable_field() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("field.bin");
    let header = dir.path().join("field.json");
    let config = dir.path().join("dump.json");
    std::fs::write(
        &config,
        format!(
            r#"{{"experiment": "loop-check", "params": {{
                "path": "1:+0.5,1:-0.5",
                "dynamics": {{"mass1": 1.0, "mass2": 1.0}},
                "grid": {{"extent": 40.0, "points": 64}},
                "packets": [
                    {{"center": 0.0, "width": 1.5, "momentum": 0.0}},
                    {{"center": 0.0, "width": 1.5, "momentum": 0.0}}],
                "tolerance": 1e-10,
                "expect": "trivial",
                "dump_field": {{"data": {data:?}, "header": {header:?}, "encoding": "binary"}}}}}}"#,
        ),
    )
    .unwrap();
    let out = run(&["--config", &config.display().to_string()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let field = multitime::wavegrid::load_wavefield2(&data, &header).unwrap();
    assert!((field.norm() - 1.0).abs() < 1e-9);
}
