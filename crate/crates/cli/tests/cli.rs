//! End-to-end tests of the wittkit binary: flags, exit codes, stdin/stdout
//! JSON, and report determinism.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn wittkit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wittkit"))
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = wittkit()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn wittkit");
    child
        .stdin
        .as_mut()
        .expect("stdin")
        .write_all(input.as_bytes())
        .expect("write stdin");
    child.wait_with_output().expect("wait")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn gen_writes_s1_for_p2() {
    let dir = std::env::temp_dir().join(format!("wittkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("sum.json");
    let out = wittkit()
        .args([
            "gen",
            "--p",
            "2",
            "--n",
            "1",
            "--kind",
            "sum",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    let summary = stdout_json(&out);
    assert_eq!(summary["generated"][1]["terms"], 3);

    // The file contains S_1 = a1 + b1 - a0*b0.
    let body: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let s1 = &body[1];
    assert_eq!(s1["kind"], "sum");
    assert_eq!(s1["vars"], serde_json::json!(["a0", "a1", "b0", "b1"]));
    assert_eq!(
        s1["terms"],
        serde_json::json!([
            {"c": "-1", "e": [1, 0, 1, 0]},
            {"c": "1", "e": [0, 1, 0, 0]},
            {"c": "1", "e": [0, 0, 0, 1]},
        ])
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn gen_s0_is_a0_plus_b0() {
    let dir = std::env::temp_dir().join(format!("wittkit-cli-s0-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("s0.json");
    let out = wittkit()
        .args([
            "gen",
            "--p",
            "2",
            "--n",
            "0",
            "--kind",
            "sum",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    stdout_json(&out);
    let body: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(
        body[0]["terms"],
        serde_json::json!([
            {"c": "1", "e": [1, 0]},
            {"c": "1", "e": [0, 1]},
        ])
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn gen_rejects_composite_p_with_exit_1() {
    let out = wittkit()
        .args(["gen", "--p", "4", "--n", "0", "--kind", "sum"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not prime"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = wittkit()
        .args(["gen", "--p", "2", "--n", "0", "--frobnicate"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_wittfp_passes() {
    let out = wittkit()
        .args(["check", "--suite", "wittfp", "--seed", "42"])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["pass"], true);
}

#[test]
fn check_squarezero_reports_expected_failure() {
    let out = wittkit()
        .args(["check", "--suite", "squarezero"])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["pass"], true);
    let names: Vec<&str> = report["suites"][0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.iter().any(|n| n.contains("delta_v_fails")));
}

#[test]
fn check_accepts_prime_and_index_filters() {
    let out = wittkit()
        .args(["check", "--suite", "wittfp", "--p", "2", "--n", "4"])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["pass"], true);
    let checks = report["suites"][0]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["name"], "w4_f2_is_z_mod_p4");

    // A filter that selects nothing is a usage error.
    let out = wittkit()
        .args(["check", "--suite", "wittfp", "--p", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_accepts_single_letter_frobenius_alias() {
    let out = run_with_stdin(
        &["eval", "--op", "F", "--ring", "Fp:3"],
        r#"{"p":3,"coords":["1","2","2"]}"#,
    );
    assert_eq!(stdout_json(&out)["coords"], serde_json::json!(["1", "2"]));
}

#[test]
fn check_unknown_suite_is_usage_error() {
    let out = wittkit()
        .args(["check", "--suite", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_reports_are_byte_identical_for_fixed_seed() {
    let args = ["check", "--suite", "polys,wittfp,squarezero,perfection,boxprod", "--seed", "42"];
    let first = wittkit().args(args).output().unwrap();
    let second = wittkit().args(args).output().unwrap();
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn eval_ghost_and_unghost() {
    let out = run_with_stdin(
        &["eval", "--op", "ghost", "--ring", "Z"],
        r#"{"p":2,"coords":["2","-1"]}"#,
    );
    assert_eq!(stdout_json(&out)["ghost"], serde_json::json!(["2", "2"]));

    let out = run_with_stdin(
        &["eval", "--op", "unghost", "--ring", "Z"],
        r#"{"p":2,"ghost":["2","2"]}"#,
    );
    assert_eq!(stdout_json(&out)["coords"], serde_json::json!(["2", "-1"]));
}

#[test]
fn eval_frobenius_over_prime_field_is_componentwise_power() {
    let out = run_with_stdin(
        &["eval", "--op", "frob", "--ring", "Fp:3"],
        r#"{"p":3,"coords":["1","2","2"]}"#,
    );
    assert_eq!(stdout_json(&out)["coords"], serde_json::json!(["1", "2"]));
}

#[test]
fn eval_teichmuller() {
    let out = run_with_stdin(
        &["eval", "--op", "teich", "--ring", "Z", "--p", "2", "--len", "4"],
        r#"{"a":"1"}"#,
    );
    assert_eq!(
        stdout_json(&out)["coords"],
        serde_json::json!(["1", "0", "0", "0"])
    );
}

#[test]
fn eval_lambda_matches_frozen_value() {
    let out = run_with_stdin(
        &["eval", "--op", "lambda", "--ring", "Z", "--p", "2", "--len", "3"],
        r#"{"a":"2"}"#,
    );
    assert_eq!(
        stdout_json(&out)["coords"],
        serde_json::json!(["2", "-1", "-4"])
    );
}

#[test]
fn eval_add_in_w2_f2() {
    let out = run_with_stdin(
        &["eval", "--op", "add", "--ring", "Fp:2"],
        r#"{"p":2,"coords":["1","0"],"rhs":["1","0"]}"#,
    );
    assert_eq!(stdout_json(&out)["coords"], serde_json::json!(["0", "1"]));
}

#[test]
fn eval_malformed_input_is_usage_error() {
    let out = run_with_stdin(&["eval", "--op", "ghost", "--ring", "Z"], "not json");
    assert_eq!(out.status.code(), Some(1));
    let out = run_with_stdin(
        &["eval", "--op", "ghost", "--ring", "Z"],
        r#"{"p":2,"coords":["two"]}"#,
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_non_integral_unghost_is_usage_error() {
    let out = run_with_stdin(
        &["eval", "--op", "unghost", "--ring", "Z"],
        r#"{"p":2,"ghost":["0","1"]}"#,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not integral"));
}

#[test]
fn bench_agrees_and_reports_term_counts() {
    let out = wittkit()
        .args(["bench", "--p", "2", "--n", "4", "--count", "200", "--seed", "7"])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["agree"], true);
    assert_eq!(report["prod_poly_terms"], serde_json::json!([1, 3, 9, 51]));
    assert!(report["poly_nanos"].as_u64().unwrap() > 0);
    assert!(report["ghost_nanos"].as_u64().unwrap() > 0);
}

#[test]
fn bench_trivial_length_agrees() {
    let out = wittkit()
        .args(["bench", "--p", "2", "--n", "1", "--count", "50"])
        .output()
        .unwrap();
    assert_eq!(stdout_json(&out)["agree"], true);
}

#[test]
fn gen_resource_limit_is_exit_2() {
    let out = wittkit()
        .args([
            "gen", "--p", "2", "--n", "3", "--kind", "prod", "--term-cap", "10",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_all_passes() {
    let out = wittkit()
        .args(["check", "--suite", "all", "--seed", "42"])
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["pass"], true);
    assert_eq!(
        report["suites"].as_array().unwrap().len(),
        wittkit_core::suites::ALL_SUITES.len()
    );
}
