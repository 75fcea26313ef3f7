//! End-to-end checks of the binary: exit codes, output files, determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehopt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn parse_stdout(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn solve_single_user_fixture_matches_published_rates() {
    let output = run_cli(&[
        "solve",
        fixture("single_user_five_slot.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let doc = parse_stdout(&output);
    let rates: Vec<f64> = doc["rates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let expected = [0.6061, 0.6061, 0.6061, 1.2528, 1.3863];
    for (got, want) in rates.iter().zip(expected) {
        assert!((got - want).abs() <= 1e-3, "rate {got} vs {want}");
    }
    assert_eq!(doc["converged"], serde_json::Value::Bool(true));
}

#[test]
fn solve_writes_the_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("policy.json");
    let output = run_cli(&[
        "solve",
        fixture("two_hop_three_slot.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["topology"], "two_hop");
    assert!(doc["throughput"].as_f64().unwrap() > 0.0);
}

#[test]
fn bad_sigma2_is_an_infeasible_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = fs::read_to_string(fixture("bc_profile_a.json"))
        .unwrap()
        .replace("\"sigma2\": 2.0", "\"sigma2\": 0.5");
    fs::write(&path, text).unwrap();
    let output = run_cli(&["solve", path.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 2, "{output:?}");
    assert!(String::from_utf8_lossy(&output.stderr).contains("sigma2"));
}

#[test]
fn iteration_cap_reports_nonconvergence_with_best_policy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("policy.json");
    let output = run_cli(&[
        "solve",
        fixture("mac_three_slot.json").to_str().unwrap(),
        "--mode",
        "successive",
        "--weights",
        "0.5,0.5",
        "--max-iters",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 3, "{output:?}");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["converged"], serde_json::Value::Bool(false));
    assert!(doc["b1"].as_f64().unwrap() >= 0.0);
}

#[test]
fn region_rejects_point_to_point_scenarios() {
    let output = run_cli(&[
        "region",
        fixture("single_user_five_slot.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1, "{output:?}");
}

#[test]
fn region_rejects_successive_mode_for_broadcast() {
    let output = run_cli(&[
        "region",
        fixture("bc_profile_a.json").to_str().unwrap(),
        "--mode",
        "successive",
    ]);
    assert_eq!(exit_code(&output), 1, "{output:?}");
}

#[test]
fn region_prints_csv_to_stdout() {
    let output = run_cli(&[
        "region",
        fixture("mac_three_slot.json").to_str().unwrap(),
        "--n-weights",
        "5",
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mu1,mu2,b1,b2,converged"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn malformed_json_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{ not json").unwrap();
    let output = run_cli(&["solve", path.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 1, "{output:?}");
}

#[test]
fn missing_file_is_a_usage_error() {
    let output = run_cli(&["solve", "/nonexistent/scenario.json"]);
    assert_eq!(exit_code(&output), 1, "{output:?}");
}

#[test]
fn unknown_suite_name_is_a_usage_error() {
    let output = run_cli(&["verify", "--suite", "everything"]);
    assert_eq!(exit_code(&output), 1, "{output:?}");
}

#[test]
fn bad_weights_are_a_usage_error() {
    let output = run_cli(&[
        "solve",
        fixture("mac_three_slot.json").to_str().unwrap(),
        "--weights",
        "0.5",
    ]);
    assert_eq!(exit_code(&output), 1, "{output:?}");
    let output = run_cli(&[
        "solve",
        fixture("mac_three_slot.json").to_str().unwrap(),
        "--weights",
        "-1,2",
    ]);
    assert_eq!(exit_code(&output), 1, "{output:?}");
}

#[test]
fn tiny_weight_grid_is_a_usage_error() {
    let output = run_cli(&[
        "region",
        fixture("mac_three_slot.json").to_str().unwrap(),
        "--n-weights",
        "2",
    ]);
    assert_eq!(exit_code(&output), 1, "{output:?}");
}

#[test]
fn solve_output_is_deterministic() {
    let path = fixture("bc_profile_a.json");
    let args = ["solve", path.to_str().unwrap(), "--weights", "0.3,0.7"];
    let first = run_cli(&args);
    let second = run_cli(&args);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
}
