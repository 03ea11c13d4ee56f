use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_newton-arcs"))
}

fn run(args: &[&str], input: Option<&str>) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    {
        let mut stdin = child.stdin.take().unwrap();
        stdin.write_all(input.unwrap_or("").as_bytes()).unwrap();
    }
    child.wait_with_output().unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

/// Every key of `expected` is present in `actual` with a matching value.
fn contains(actual: &Value, expected: &Value) -> bool {
    match (actual, expected) {
        (Value::Object(a), Value::Object(e)) => e.iter().all(|(k, v)| a.get(k).is_some_and(|av| contains(av, v))),
        (Value::Array(a), Value::Array(e)) => a.len() == e.len() && a.iter().zip(e).all(|(x, y)| contains(x, y)),
        _ => actual == expected,
    }
}

#[test]
fn regression_fixtures() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut paths: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    assert!(paths.len() >= 40);
    let mut bad = Vec::new();
    for path in &paths {
        let fixture: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        let args: Vec<&str> = fixture["args"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
        let input = serde_json::to_string(&fixture["input"]).unwrap();
        let out = run(&args, Some(&input));
        let code = out.status.code().unwrap();
        let value = json_out(&out);
        if code != fixture["exit"].as_i64().unwrap() as i32 || !contains(&value, &fixture["expect"]) {
            bad.push(format!("{}: exit {code}, got {value}", path.file_name().unwrap().to_string_lossy()));
        }
    }
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn wdiv_epsilon_example() {
    let out = run(&["wdiv"], Some(r#"{"ring": "QQ[e]/(e^2)", "coeffs": ["e", 0, 1, "e"], "T": 6}"#));
    assert_eq!(out.status.code(), Some(0));
    let v = json_out(&out);
    assert_eq!(v["q"], "t^2 + e");
    assert_eq!(v["u"], serde_json::json!(["1", "e"]));
    assert_eq!(v["d"], 2);
}

#[test]
fn fuzz_replay_is_byte_identical() {
    let args = ["grp", "fuzz", "--seed", "1", "--campaign", "groupoid-axioms", "--p-max", "5"];
    let a = run(&args, None);
    let b = run(&args, None);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json_out(&a)["pass"], true);
}

#[test]
fn every_campaign_runs_from_the_command_line() {
    for c in ["zr-bijection", "weierstrass-roundtrip", "arc-roundtrip", "fiber-classify"] {
        let out = run(&["grp", "fuzz", "--seed", "3", "--campaign", c, "--samples", "5", "--p-max", "5"], None);
        assert_eq!(out.status.code(), Some(0), "{c}: {}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(json_out(&out)["campaign"], c);
    }
}

#[test]
fn unknown_campaign_is_a_domain_error() {
    let out = run(&["grp", "fuzz", "--campaign", "nope"], None);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_out(&out)["error"]["code"], "invalid-input");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(run(&["zr"], None).status.code(), Some(2));
    assert_eq!(run(&["wdiv", "--out", "yaml"], None).status.code(), Some(2));
}

#[test]
fn ring_and_truncation_flags_override_the_input() {
    let out = run(&["wdiv", "--ring", "QQ[e]/(e^2)", "--trunc", "6"], Some(r#"{"coeffs": ["e", 0, 1, "e"]}"#));
    let v = json_out(&out);
    assert_eq!(v["q"], "t^2 + e");
    assert_eq!(v["T"], 6);
    let short = run(&["wdiv", "--ring", "QQ[e]/(e^2)", "--trunc", "4"], Some(r#"{"coeffs": ["e", 0, 1, "e"]}"#));
    assert_eq!(short.status.code(), Some(1));
    assert_eq!(json_out(&short)["error"]["code"], "insufficient-truncation");
}

#[test]
fn syntax_errors_carry_a_location() {
    let out = run(&["sys", "build"], Some(r#"{"n": 1, "l": 1, "f": ["y^2 - * x"]}"#));
    assert_eq!(out.status.code(), Some(1));
    let v = json_out(&out);
    assert_eq!(v["error"]["code"], "syntax-error");
    assert!(v["error"]["location"].is_u64());
}

#[test]
fn reads_input_from_a_file() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sys-build-parabola.json");
    let fixture: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let tmp = std::env::temp_dir().join(format!("newton-arcs-cli-{}.json", std::process::id()));
    std::fs::write(&tmp, fixture["input"].to_string()).unwrap();
    let out = bin().args(["sys", "build"]).arg(&tmp).output().unwrap();
    std::fs::remove_file(&tmp).ok();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_out(&out)["Q"], "2*y");
}

#[test]
fn malformed_json_is_reported() {
    let out = run(&["wdiv"], Some("{not json"));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_out(&out)["error"]["code"], "invalid-input");
}
