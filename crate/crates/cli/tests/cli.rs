use std::process::Command;

use aj_cli::{run, Cli};
use clap::Parser;

fn aj(args: &[&str]) -> (i32, String) {
    let cli = Cli::try_parse_from(std::iter::once("aj").chain(args.iter().copied())).unwrap();
    let out = run(&cli);
    (out.code, out.output)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aj"))
}

#[test]
fn jones_table() {
    let (code, out) = aj(&["jones", "--knot", "unknot", "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().nth(3).unwrap(), "3\t1 + q + q^2 + q^3");
}

#[test]
fn jones_json_is_deterministic() {
    let a = aj(&["jones", "--knot", "4_1", "--n", "3", "--format", "json"]);
    let b = aj(&["jones", "--knot", "4_1", "--n", "3", "--format", "json"]);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a.1).unwrap();
    assert_eq!(v["values"].as_array().unwrap().len(), 4);
    assert_eq!(v["values"][0]["J"], "1");
}

#[test]
fn pd_from_file_and_inline_agree() {
    let pd = "X[1,5,2,4] X[3,1,4,6] X[5,3,6,2]";
    let path = std::env::temp_dir().join(format!("aj-cli-{}.pd", std::process::id()));
    std::fs::write(&path, pd).unwrap();
    let a = aj(&["jones", "--pd", pd, "--n", "2"]);
    let b = aj(&["jones", "--pd", path.to_str().unwrap(), "--n", "2"]);
    std::fs::remove_file(&path).ok();
    assert_eq!(a.0, 0);
    assert_eq!(a, b);
}

#[test]
fn gauss_input() {
    let (code, out) = aj(&["jones", "--gauss", "O1- U2- O3- U1- O2- U3-", "--n", "1"]);
    assert_eq!(code, 0, "{}", out);
}

#[test]
fn gluing_passes_and_corruption_fails() {
    assert_eq!(aj(&["gluing", "--knot", "5_2"]).0, 0);
    let (code, out) = aj(&["gluing", "--knot", "4_1", "--corrupt-corner"]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL"));
}

#[test]
fn match_modes() {
    assert_eq!(aj(&["match", "--knot", "3_1"]).0, 0);
    assert_eq!(aj(&["match", "--knot", "6_1", "--numeric-only"]).0, 0);
    let (code, out) = aj(&["match", "--knot", "4_1", "--corrupt-corner", "--numeric-only"]);
    assert_eq!(code, 1);
    assert!(out.contains("match failure"));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(aj(&["jones", "--knot", "9_99"]).0, 2);
    assert_eq!(aj(&["jones", "--pd", "X[1,2,3]"]).0, 2);
    assert_eq!(aj(&["gluing", "--pd", "X[1,1,2,2]"]).0, 2);
    assert_eq!(aj(&["solve", "--knot", "3_1", "--grid", "0"]).0, 2);
    let (code, out) = aj(&["aj", "--knot", "3_1", "--n", "4"]);
    assert_eq!(code, 2);
    assert!(out.contains("suggested minimum"));
}

#[test]
fn solve_is_deterministic() {
    let a = aj(&["solve", "--knot", "4_1", "--grid", "5", "--format", "json"]);
    let b = aj(&["solve", "--knot", "4_1", "--grid", "5", "--format", "json"]);
    assert_eq!(a.0, 0);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a.1).unwrap();
    assert_eq!(v["covered"], 5);
}

#[test]
fn aj_on_the_trefoil() {
    let (code, out) = aj(&["aj", "--knot", "3_1", "--n", "22", "--de", "3", "--dq", "3", "--dqq", "5", "--format", "json"]);
    assert_eq!(code, 0, "{}", out);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["aj"]["max_residual"].as_f64().unwrap() < 1e-6);
    assert!(v["control"]["max_residual"].as_f64().unwrap() > 1e-2);
}

#[test]
fn binary_exit_codes_and_out_file() {
    let st = bin().args(["jones", "--knot", "nope"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("unknown knot"));
    assert!(st.stdout.is_empty());

    let st = bin().args(["gluing", "--knot", "4_1", "--corrupt-corner"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1));

    let st = bin().args(["jones", "--n", "2"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));

    let path = std::env::temp_dir().join(format!("aj-out-{}.json", std::process::id()));
    let st = bin()
        .args(["jones", "--knot", "3_1", "--n", "2", "--format", "json", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(v["diagram"], "3_1");
}
