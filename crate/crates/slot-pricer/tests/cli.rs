//! End-to-end tests of the binary: exit codes, JSON/CSV output and
//! determinism across runs and thread counts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slot-pricer"))
}

fn write_ref1(dir: &Path) -> PathBuf {
    let path = dir.join("ref1.json");
    std::fs::write(
        &path,
        r#"{
  "schema": "slot-pricing/1",
  "metadata": { "name": "ref1" },
  "distance": { "family": "quadratic", "a": 1.0, "c": -1.0 },
  "slots": [
    { "t": 0.0, "capacity": 2.0 },
    { "t": 2.0, "capacity": 2.0 }
  ],
  "measure": { "breakpoints": [-1.0, 3.0], "densities": [0.5] }
}"#,
    )
    .unwrap();
    path
}

fn json_of(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

/// Result payload with the wall-time field removed.
fn stable_part(stdout: &[u8]) -> serde_json::Value {
    let mut value: serde_json::Value = serde_json::from_slice(stdout).unwrap();
    value.as_object_mut().unwrap().remove("wall_time_ms");
    value
}

#[test]
fn solve_matches_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ref1(dir.path());
    let output = bin()
        .args(["solve", "--instance"])
        .arg(&instance)
        .args(["--prices", "0.5,1"])
        .output()
        .unwrap();
    let value = json_of(&output);
    assert!((value["value"].as_f64().unwrap() - 0.7071067811865475).abs() <= 1e-9);
    assert_eq!(value["profile"], serde_json::json!([0.5, 0.5]));
    assert_eq!(value["feasible"], serde_json::json!(true));
    assert!(value["instance_hash"]
        .as_str()
        .unwrap()
        .starts_with("sha256:"));
}

#[test]
fn check_reports_loads_and_revenue() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ref1(dir.path());
    let output = bin()
        .args(["check", "--instance"])
        .arg(&instance)
        .args(["--profile", "0.5,1.0"])
        .output()
        .unwrap();
    let value = json_of(&output);
    let loads: Vec<f64> = value["slots"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["load"].as_f64().unwrap())
        .collect();
    assert!((loads[0] - 0.7071067811865475).abs() <= 1e-9);
    assert_eq!(loads[1], 0.0);
    assert!((value["revenue"].as_f64().unwrap() - 0.35355339059327373).abs() <= 1e-9);
    assert_eq!(value["feasible"], serde_json::json!(true));
}

#[test]
fn bounds_produces_nonnegative_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ref1(dir.path());
    let output = bin()
        .args(["bounds", "--instance"])
        .arg(&instance)
        .args(["--deltas", "0.2,0.1,0.05"])
        .output()
        .unwrap();
    let value = json_of(&output);
    let reports = value["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for report in reports {
        assert!(report["gap"].as_f64().unwrap() >= -1e-9);
        assert!(report["lb"].as_f64().unwrap() <= report["ub"].as_f64().unwrap() + 1e-9);
    }
    assert_eq!(value["constants"]["delta_max"], serde_json::json!(16.0));
}

#[test]
fn bounds_warns_above_delta_max() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ref1(dir.path());
    let output = bin()
        .args(["bounds", "--instance"])
        .arg(&instance)
        .args(["--deltas", "20"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("delta_max"), "stderr: {stderr}");
    let value = json_of(&output);
    assert_eq!(value["warnings"].as_array().unwrap().len(), 1);

    let quiet = bin()
        .args(["bounds", "--instance"])
        .arg(&instance)
        .args(["--deltas", "20", "--warn-delta-max=false"])
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&quiet.stderr).is_empty());
}

#[test]
fn oracle_agrees_with_solve() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ref1(dir.path());
    let output = bin()
        .args(["oracle", "--instance"])
        .arg(&instance)
        .args(["--prices", "0.5,1"])
        .output()
        .unwrap();
    let value = json_of(&output);
    assert!((value["value"].as_f64().unwrap() - 0.7071067811865475).abs() <= 1e-9);
    assert_eq!(value["profiles_evaluated"], serde_json::json!(4));
    assert_eq!(value["argmax_profiles"], serde_json::json!([[0.5, 0.5]]));
}

#[test]
fn envelope_emits_csv_with_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ref1(dir.path());
    let out = dir.path().join("envelope.csv");
    let status = bin()
        .args(["envelope", "--instance"])
        .arg(&instance)
        .args(["--profile", "0.5,1.0", "--samples", "33", "--output"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,envelope,slot,served"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert!(rows.len() >= 33);
    for row in &rows {
        assert_eq!(row.len(), 4);
    }
    // x strictly increasing
    let xs: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    // the served-region boundary of slot 1 is among the rows and served
    let boundary = rows
        .iter()
        .find(|r| (r[0].parse::<f64>().unwrap() - 0.5f64.sqrt()).abs() <= 1e-12)
        .expect("served boundary row present");
    assert_eq!(boundary[2], "1");
    assert_eq!(boundary[3], "true");
    // far left is slot 1 and unserved, far right slot 2 and unserved
    assert_eq!(rows.first().unwrap()[2], "1");
    assert_eq!(rows.first().unwrap()[3], "false");
    assert_eq!(rows.last().unwrap()[2], "2");
    assert_eq!(rows.last().unwrap()[3], "false");
}

#[test]
fn validate_accepts_good_and_rejects_bad() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ref1(dir.path());
    let status = bin()
        .args(["validate", "--instance"])
        .arg(&instance)
        .status()
        .unwrap();
    assert!(status.success());

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{
  "schema": "slot-pricing/1",
  "distance": { "family": "quadratic", "a": 1.0, "c": -1.0 },
  "slots": [ { "t": 2.0, "capacity": 2.0 }, { "t": 0.0, "capacity": 2.0 } ],
  "measure": { "breakpoints": [-1.0, 3.0], "densities": [0.5] }
}"#,
    )
    .unwrap();
    let output = bin().args(["validate", "--instance"]).arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("strictly increasing"),
        "stderr names the violated invariant: {stderr}"
    );
}

#[test]
fn exit_codes_cover_infeasible_and_mode_rejection() {
    let dir = tempfile::tempdir().unwrap();
    // single slot with tiny capacity: the only price forces over-demand
    let tight = dir.path().join("tight.json");
    std::fs::write(
        &tight,
        r#"{
  "schema": "slot-pricing/1",
  "distance": { "family": "quadratic", "a": 1.0, "c": -1.0 },
  "slots": [ { "t": 0.0, "capacity": 0.1 } ],
  "measure": { "breakpoints": [-1.0, 1.0], "densities": [1.0] }
}"#,
    )
    .unwrap();
    let output = bin()
        .args(["solve", "--instance"])
        .arg(&tight)
        .args(["--prices", "0.0"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let value: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(value["value"], serde_json::json!("-inf"));

    // bounds on a hyperbolic instance is a mode rejection
    let hyper = dir.path().join("hyper.json");
    std::fs::write(
        &hyper,
        r#"{
  "schema": "slot-pricing/1",
  "distance": { "family": "hyperbolic", "a": 1.0, "c": -2.0 },
  "slots": [ { "t": 0.0, "capacity": 1.0 } ],
  "measure": { "breakpoints": [-1.0, 1.0], "densities": [1.0] }
}"#,
    )
    .unwrap();
    let output = bin()
        .args(["bounds", "--instance"])
        .arg(&hyper)
        .args(["--deltas", "0.1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));

    // unreadable path and malformed JSON are validation failures
    let output = bin()
        .args(["solve", "--instance", "does-not-exist.json", "--prices", "1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn identical_runs_are_byte_identical_modulo_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ref1(dir.path());
    let run = |threads: &str| {
        bin()
            .args(["solve", "--instance"])
            .arg(&instance)
            .args(["--grid", "0.25", "--threads", threads])
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("1");
    assert_eq!(stable_part(&a.stdout), stable_part(&b.stdout));

    // thread count must not change the result, only the timing
    let c = run("2");
    let mut one = stable_part(&a.stdout);
    let mut two = stable_part(&c.stdout);
    one.as_object_mut().unwrap().remove("command");
    two.as_object_mut().unwrap().remove("command");
    assert_eq!(one, two);

    // env var fallback for --threads
    let env_run = bin()
        .args(["solve", "--instance"])
        .arg(&instance)
        .args(["--grid", "0.25"])
        .env("SLOT_PRICER_THREADS", "1")
        .output()
        .unwrap();
    let mut via_env = stable_part(&env_run.stdout);
    via_env.as_object_mut().unwrap().remove("command");
    assert_eq!(via_env, one);
}

#[test]
fn instance_round_trip_is_value_identical() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write_ref1(dir.path());
    let bytes = std::fs::read(&instance).unwrap();
    let parsed: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    let reserialized = serde_json::to_string_pretty(&parsed).unwrap();
    let reparsed: serde_json::Value = serde_json::from_str(&reserialized).unwrap();
    assert_eq!(parsed, reparsed);
}
