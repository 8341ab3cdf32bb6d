use std::process::{Command, Output};

use serde_json::Value;

fn meijer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meijer"))
        .args(args)
        .env_remove("NORLUND_MAX_TERMS")
        .output()
        .expect("binary runs")
}

fn json_out(args: &[&str]) -> Value {
    let out = meijer(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn mismatched_lengths_are_usage_errors() {
    let out = meijer(&["coeffs", "--kind", "g", "--a", "0", "--b", "1,2", "--n", "2"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(meijer(&["verify", "--suite", "no_such_identity"]).status.code(), Some(64));
}

#[test]
fn order_one_value_and_outside_disk() {
    let v = json_out(&["eval", "--fn", "gp0pp", "--a", "0", "--b", "2", "--z", "0.5"]);
    assert!((v["value"][0].as_f64().unwrap() - 0.5).abs() < 1e-15);
    let v = json_out(&["eval", "--fn", "gp0pp", "--a", "0", "--b", "2", "--z", "1.5"]);
    assert_eq!(v["value"][0].as_f64(), Some(0.0));
    assert_eq!(v["value"][1].as_f64(), Some(0.0));
}

#[test]
fn terminating_pfq_is_exact() {
    let v = json_out(&[
        "--mode", "exact", "eval", "--fn", "pfq", "--a", "-3,1/2", "--b", "2/3", "--z", "1/3",
    ]);
    assert_eq!(v["exact"], "289/640");
    assert_eq!(v["regime"], "terminating");
}

#[test]
fn exact_coefficients_are_rational_strings() {
    let v = json_out(&[
        "--mode", "exact", "coeffs", "--kind", "g", "--a", "0,1/2", "--b", "1,3/2", "--k", "2", "--n",
        "3",
    ]);
    let vals = v["values"].as_array().unwrap();
    assert_eq!(vals.len(), 4);
    assert_eq!(vals[0], "1");
    assert!(vals.iter().all(Value::is_string));
    assert_eq!(vals[3], "105/8");
}

#[test]
fn csv_headers() {
    let out = meijer(&[
        "--output", "csv", "--mode", "exact", "coeffs", "--kind", "g", "--a", "0,1/2", "--b", "1,3/2",
        "--k", "2", "--n", "2",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("n,value,re,im"));
    assert_eq!(text.lines().count(), 4);

    let out = meijer(&["--output", "csv", "verify", "--suite", "ptolemy", "--trials", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("identity_id,seed,trial,verdict,"));
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--suite", "ptolemy,identity2,sheppard", "--trials", "5", "--seed", "11"];
    let first = meijer(&args);
    let second = meijer(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let last = String::from_utf8(first.stdout).unwrap().lines().last().unwrap().to_string();
    let summary: Value = serde_json::from_str(&last).unwrap();
    assert_eq!(summary["summary"]["total"]["fail"], 0);
}
