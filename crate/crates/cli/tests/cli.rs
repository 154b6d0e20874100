//! End-to-end tests of the command-line surface: artifacts, determinism,
//! exit codes and error prefixes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lct() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lct"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lct-cli-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn logistic_spec_json(sigma: f64, epsilon: f64) -> String {
    format!(
        r#"{{
  "D": 1, "d": 1,
  "c": [0.0, 1.0],
  "kernels": [
    {{"order": 1, "sigma": {sigma}, "a": 1.0,
      "oscillations": [{{"eps": 0.0, "mu": 0.0, "omega": 0.8}}]}},
    {{"order": 2, "sigma": {sigma}, "a": 1.0,
      "oscillations": [{{"eps": {epsilon}, "mu": 0.0, "omega": 0.8}}]}}
  ],
  "rhs": "builtin:logistic",
  "history": "constant:[1.05]",
  "params": {{"r": 2.0, "K": 1.0, "sigma": {sigma}, "Omega": 0.8, "epsilon": {epsilon}}},
  "r": 7
}}"#
    )
}

fn write_spec(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

#[test]
fn verify_suite_alias_runs_clean() {
    let output = lct()
        .args(["verify", "--suite", "appendix-b", "--seed", "42"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("ok"), "{stdout}");
}

#[test]
fn transform_reports_reduced_dimension() {
    let dir = temp_dir("transform");
    let spec = write_spec(&dir, "spec.json", &logistic_spec_json(1.0, 0.5));
    let output = lct()
        .args(["transform", "--input"])
        .arg(&spec)
        .args(["--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let json = fs::read_to_string(dir.join("transform.json")).unwrap();
    assert!(json.contains("\"r\":7"), "{json}");
    assert!(json.contains("\"state_names\":[\"x1\",\"V1_1\",\"V2_1\""), "{json}");
}

#[test]
fn declared_dimension_mismatch_is_validation_error() {
    let dir = temp_dir("rmismatch");
    let bad = logistic_spec_json(1.0, 0.5).replace("\"r\": 7", "\"r\": 9");
    let spec = write_spec(&dir, "spec.json", &bad);
    let output = lct()
        .args(["transform", "--input"])
        .arg(&spec)
        .args(["--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = stderr_of(&output);
    assert!(err.starts_with("error[validation]:"), "{err}");
    assert!(err.lines().count() == 1, "multi-line error: {err}");
}

#[test]
fn malformed_json_is_validation_error() {
    let dir = temp_dir("badjson");
    let spec = write_spec(&dir, "spec.json", "{ not json");
    let output = lct()
        .args(["stability", "--input"])
        .arg(&spec)
        .args(["--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).starts_with("error[validation]:"));
}

#[test]
fn overrides_regenerate_builtin_kernels() {
    // Overriding epsilon on a builtin-logistic file must update the kernel
    // list too, not collide with the file's stale amplitudes.
    let dir = temp_dir("setparam");
    let spec = write_spec(&dir, "spec.json", &logistic_spec_json(1.0, 0.5));
    let output = lct()
        .args(["equilibrium", "--input"])
        .arg(&spec)
        .args(["--set", "epsilon=0.4", "--guess", "0.9", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let json = fs::read_to_string(dir.join("equilibrium.json")).unwrap();
    // theta = 0.64: x_e = 2.6896 / 2.8336
    assert!(json.contains("\"x_e\":[9.4918125"), "{json}");
}

#[test]
fn unknown_override_key_rejected() {
    let dir = temp_dir("override");
    let spec = write_spec(&dir, "spec.json", &logistic_spec_json(1.0, 0.0));
    let output = lct()
        .args(["stability", "--input"])
        .arg(&spec)
        .args(["--set", "bogus=1.0", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = stderr_of(&output);
    assert!(err.contains("unknown override key"), "{err}");
}

#[test]
fn unknown_flag_is_single_line_validation_error() {
    let output = lct().args(["stability", "--frobnicate"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = stderr_of(&output);
    assert!(err.starts_with("error[validation]:"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
}

#[test]
fn stability_csv_has_frozen_columns() {
    let dir = temp_dir("stab");
    let output = lct()
        .args([
            "stability", "--builtin", "logistic", "--sigma", "2.0", "--epsilon", "0.1", "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let csv = fs::read_to_string(dir.join("stability.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "sigma,epsilon,D1,D2,D3,D4,D5,D6,D7,verdict");
    assert!(csv.lines().nth(1).unwrap().ends_with("stable"));
}

#[test]
fn phase_diagram_is_deterministic_across_thread_counts() {
    let dir1 = temp_dir("pd1");
    let dir2 = temp_dir("pd2");
    for (dir, threads) in [(&dir1, "1"), (&dir2, "4")] {
        let output = lct()
            .args([
                "phase-diagram",
                "--builtin",
                "logistic",
                "--grid",
                "24x18",
                "--threads",
                threads,
                "--out",
            ])
            .arg(dir)
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", stderr_of(&output));
    }
    let a = fs::read(dir1.join("phase_diagram.csv")).unwrap();
    let b = fs::read(dir2.join("phase_diagram.csv")).unwrap();
    assert_eq!(a, b, "thread count changed the CSV bytes");
}

#[test]
fn thread_env_var_fallback_is_honored() {
    let dir1 = temp_dir("env1");
    let dir2 = temp_dir("env2");
    let output = lct()
        .args(["phase-diagram", "--builtin", "logistic", "--grid", "10x8", "--threads", "1", "--out"])
        .arg(&dir1)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let output = lct()
        .env("LCT_THREADS", "3")
        .args(["phase-diagram", "--builtin", "logistic", "--grid", "10x8", "--out"])
        .arg(&dir2)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    assert_eq!(
        fs::read(dir1.join("phase_diagram.csv")).unwrap(),
        fs::read(dir2.join("phase_diagram.csv")).unwrap()
    );
}

#[test]
fn phase_diagram_repeat_runs_are_byte_identical() {
    let dir1 = temp_dir("pdr1");
    let dir2 = temp_dir("pdr2");
    for dir in [&dir1, &dir2] {
        let output = lct()
            .args(["phase-diagram", "--builtin", "logistic", "--grid", "16x12", "--plot", "--out"])
            .arg(dir)
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", stderr_of(&output));
    }
    assert_eq!(
        fs::read(dir1.join("phase_diagram.csv")).unwrap(),
        fs::read(dir2.join("phase_diagram.csv")).unwrap()
    );
    assert_eq!(
        fs::read(dir1.join("phase_diagram.svg")).unwrap(),
        fs::read(dir2.join("phase_diagram.svg")).unwrap()
    );
}

#[test]
fn simulate_writes_monotone_trajectory() {
    let dir = temp_dir("sim");
    let output = lct()
        .args([
            "simulate", "--builtin", "logistic", "--sigma", "2.0", "--T", "5", "--h", "0.01",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,V1_1,V2_1,u1_1_1,u2_1_1,v1_1_1,v2_1_1");
    let mut prev = -1.0f64;
    for line in lines {
        let t: f64 = line.split(',').next().unwrap().parse().unwrap();
        assert!(t > prev);
        prev = t;
    }
    assert_eq!(prev, 5.0);
}

#[test]
fn simulate_direct_method_emits_delay_state_only() {
    let dir = temp_dir("simdirect");
    let output = lct()
        .args([
            "simulate", "--builtin", "logistic", "--sigma", "2.0", "--T", "2", "--h", "0.01",
            "--method", "direct", "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,x1");
}

#[test]
fn continuity_certificate_for_shifted_kernels() {
    let dir = temp_dir("cont");
    let a = write_spec(&dir, "a.json", &logistic_spec_json(1.0, 0.3));
    let b = write_spec(&dir, "b.json", &logistic_spec_json(1.0, 0.35));
    let output = lct()
        .args(["continuity", "--input"])
        .arg(&a)
        .arg("--input2")
        .arg(&b)
        .args(["--T", "3", "--h", "0.01", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let json = fs::read_to_string(dir.join("continuity.json")).unwrap();
    assert!(json.contains("\"satisfied\":true"), "{json}");
}

#[test]
fn hopf_csv_has_expected_seed_root() {
    let dir = temp_dir("hopf");
    let output = lct()
        .args([
            "hopf", "--builtin", "logistic", "--eps-range", "0:0.2", "--steps", "10",
            "--sigma-range", "0.2:2.5", "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let csv = fs::read_to_string(dir.join("hopf.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "epsilon,sigma,transversality");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let sigma: f64 = first[1].parse().unwrap();
    assert!((sigma - 1.0).abs() < 1e-7, "seed sigma {sigma}");
}

#[test]
fn linear_rhs_spec_round_trips() {
    let dir = temp_dir("linear");
    let spec = r#"{
  "D": 2, "d": 1,
  "c": [0.5],
  "kernels": [{"order": 1, "sigma": 1.0, "a": 1.0, "oscillations": []}],
  "rhs": "linear:{\"A\": [[-1.0, 0.2], [0.0, -0.5]], \"B\": [[0.1, 0.0], [0.3, 0.0]]}",
  "history": "constant:[0.5, -0.2]"
}"#;
    let path = write_spec(&dir, "linear.json", spec);
    let output = lct()
        .args(["transform", "--input"])
        .arg(&path)
        .args(["--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr_of(&output));
    let json = fs::read_to_string(dir.join("transform.json")).unwrap();
    // r = D + d N = 2 + 1
    assert!(json.contains("\"r\":3"), "{json}");
}
