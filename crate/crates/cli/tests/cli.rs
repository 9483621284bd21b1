use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cohq(args: &[&str]) -> Output {
    cohq_env(args, &[])
}

fn cohq_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cohq"));
    cmd.args(args).env_remove("COHQ_GUARD_DIM");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("run cohq")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn appendix_c_example_values() {
    let out = cohq(&["example", "appendix-c"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert!((v["ic_pi12"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["ic_pi34"].as_f64().unwrap() + 1.0).abs() < 1e-9);
    // Hand value 1 − 2ε at ε = 0.01.
    assert!((v["ic_pi_prime_12"].as_f64().unwrap() - 0.98).abs() < 1e-12);
}

#[test]
fn verify_lemmas_has_no_violations() {
    let out = cohq(&["verify-lemmas", "--trials", "1000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["passed"], Value::Bool(true));
    for s in v["suites"].as_array().unwrap() {
        assert_eq!(s["violations"], 0, "{}", s["kind"]);
    }
}

#[test]
fn verify_lemmas_csv_has_one_row_per_suite() {
    let out = cohq(&["verify-lemmas", "--trials", "50", "--chernoff-trials", "50", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "suite,trials,violations,worst_margin,failure_frequency,t,bound,passed");
    assert_eq!(lines.len(), 1 + 6 + 3);
}

#[test]
fn truncated_channel_json_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "chan.json", "{\"dim_in\": 2, \"dim_out\": 2, \"kraus\": [[[[1,0],");
    let out = cohq(&["capacity", "--channel", &path]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 1 column"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn non_trace_preserving_channel_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "chan.json",
        r#"{"dim_in": 1, "dim_out": 1, "kraus": [[[[2, 0]]]]}"#,
    );
    let out = cohq(&["coherent-info", "--channel", &path, "--state", "mixed(1)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("trace preserving"));
}

#[test]
fn guard_env_limits_tensor_powers() {
    let args = ["capacity", "--channel", "appendix-c", "--l", "2", "--restarts", "1"];
    let out = cohq_env(&args, &[("COHQ_GUARD_DIM", "8")]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("size guard exceeded") && err.contains("COHQ_GUARD_DIM"), "{err}");
    let bad = cohq_env(&["example", "appendix-c"], &[("COHQ_GUARD_DIM", "zero")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn csv_is_rejected_for_single_reports() {
    let out = cohq(&["entropy", "--state", "mixed(2)", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_state_and_channel_names_exit_2() {
    assert_eq!(cohq(&["entropy", "--state", "bogus(3)"]).status.code(), Some(2));
    let out = cohq(&["coherent-info", "--channel", "nope", "--state", "mixed(2)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("appendix-c"));
    let out = cohq(&["coherent-info", "--channel", "identity(2)", "--state", "mixed(3)"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn entropy_of_a_bell_pair() {
    let dir = tempfile::tempdir().unwrap();
    let row = |a: f64, b: f64| format!("[[{a},0],[0,0],[0,0],[{b},0]]");
    let body = format!("[{},{},{},{}]", row(0.5, 0.5), row(0.0, 0.0), row(0.0, 0.0), row(0.5, 0.5));
    let path = write(dir.path(), "bell.json", &body);
    let out = cohq(&["entropy", "--state", &path, "--dims", "2,2", "--labels", "R,Q"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = &json(&out)["values"];
    assert!(v["H"].as_f64().unwrap().abs() < 1e-12);
    assert!((v["H(R)"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["I(R;Q)"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((v["H(R|Q)"].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn coherent_info_of_identity_is_the_entropy() {
    let out = cohq(&["coherent-info", "--channel", "identity(3)", "--state", "diag(0.5,0.25,0.25)"]);
    assert_eq!(out.status.code(), Some(0));
    let v = &json(&out)["values"];
    assert!((v["I_c"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(json(&out)["inputs"]["channel"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_csv_columns_and_seed_order() {
    let out = cohq(&[
        "simulate", "covering", "--channel", "appendix-c", "--state", "uniform(4;0,2)", "--n", "3", "--mu", "2",
        "--seeds", "3", "--seed", "10", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "seed,n,kappa,mu,p_e_mean,p_e_max,leakage_bits,flatness_distance,fidelity"
    );
    let seeds: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(seeds, ["10", "11", "12"]);
    // Covering rows have no decoding error: empty cells.
    assert!(lines[1].starts_with("10,3,,2,,,,"));
}

#[test]
fn wiretap_file_drives_hsw() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "w.json",
        r#"{"bob": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]],
            "eve": [[[[1,0]]], [[[1,0]]]],
            "probs": [0.5, 0.5]}"#,
    );
    let out = cohq(&["simulate", "hsw", "--wiretap", &path, "--n", "3", "--nu", "8", "--distinct", "--seeds", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    for row in v["rows"].as_array().unwrap() {
        assert!(row["p_e_max"].as_f64().unwrap().abs() < 1e-12);
    }
    assert!((v["recommended"]["chi_bob"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["recommended"]["chi_eve"].as_f64().unwrap(), 0.0);
}

#[test]
fn typicality_failure_exits_1_but_writes_the_report() {
    // A depolarized letter seen once is never δ-typical over four equal
    // eigenvalues, so the conditional mass is zero at n = 2.
    let args = [
        "typicality", "verify", "--channel", "appendix-c", "--state", "diag(0.5,0,0.5,0)", "--n", "2", "--delta",
        "0.3", "--format", "csv",
    ];
    let out = cohq(&args);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,delta,property,value,bound,margin,holds\n"));
    assert_eq!(text.lines().count(), 1 + 9);
}

#[test]
fn typicality_holds_on_an_eve_trivial_wiretap() {
    let out = cohq(&[
        "typicality", "verify", "--channel", "identity(2)", "--state", "diag(0.5,0.5)", "--n", "4,6", "--delta", "0.3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out).as_array().unwrap().len(), 2);
}

#[test]
fn output_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("out.json");
    let args = ["example", "appendix-c", "--epsilon", "0.05"];
    let direct = cohq(&args);
    let mut with_file = args.to_vec();
    with_file.extend(["--output", file.to_str().unwrap()]);
    let out = cohq(&with_file);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&file).unwrap(), direct.stdout);
}

#[test]
fn same_seed_same_bytes_across_thread_counts() {
    let args = [
        "private-info", "--channel", "depolarizing(2)", "--state", "diag(0.8,0.2)", "--restarts", "2", "--seed", "5",
    ];
    let one = cohq_env(&args, &[("RAYON_NUM_THREADS", "1")]);
    let four = cohq_env(&args, &[("RAYON_NUM_THREADS", "4")]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let other = cohq(&[
        "private-info", "--channel", "depolarizing(2)", "--state", "diag(0.8,0.2)", "--restarts", "2", "--seed", "6",
    ]);
    assert_ne!(one.stdout, other.stdout);
}

#[test]
fn capacity_reports_a_lower_bound() {
    let out = cohq(&["capacity", "--channel", "identity(2)", "--l", "2", "--restarts", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert!((v["per_use"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["lower_bound_only"], Value::Bool(true));
    assert_eq!(v["objective"], "coherent");
}
