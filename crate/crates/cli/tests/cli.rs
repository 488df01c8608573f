use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

fn freemetric(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_freemetric"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn reads_stdin_when_no_input_is_given() {
    let o = freemetric(
        &["validate"],
        r#"{"points":["a","b"],"dist":[[0,1],[1,0]]}"#,
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o), json!({ "valid": true }));
}

#[test]
fn writes_to_out_file() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("fvf_out.json");
    let input = r#"{"group":{"elements":["0","1","2","3","4"],"table":[[0,1,2,3,4],[1,2,3,4,0],[2,3,4,0,1],[3,4,0,1,2],[4,0,1,2,3]]},"v":["4","0","1"]}"#;
    let o = freemetric(&["fvf", "--out", path.to_str().unwrap()], input);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written, json!({ "k": 2, "F": ["0", "1"] }));
}

#[test]
fn malformed_json_is_a_structured_error() {
    let o = freemetric(&["norm"], "{\"space\": [");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["error"]["kind"], json!("malformed_json"));

    // well-formed JSON of the wrong shape
    let o = freemetric(&["norm"], r#"{"space": 3}"#);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["error"]["kind"], json!("malformed_json"));
}

#[test]
fn library_rejections_exit_one() {
    let input = r#"{"space":{"points":["a","b"],"dist":[[0,4],[4,0]]},"function":{"support":["a","b"],"values":{"a":"1","b":"1"}}}"#;
    let o = freemetric(&["hat-extend"], input);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["error"]["kind"], json!("not_katetov"));

    let pseudo = r#"{"points":["a","b"],"dist":[[0,0],[0,0]],"pseudo":true}"#;
    let o = freemetric(&["iso-enum"], pseudo);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["error"]["kind"], json!("domain"));
}

#[test]
fn usage_errors_exit_two_before_reading_input() {
    for args in [
        &["bogus"][..],
        &["norm", "--bogus"],
        &["proptest", "nope"],
        &["proptest", "duality", "--trials", "x"],
    ] {
        // stdin is never read, so an invalid document does not matter
        let o = freemetric(args, "not json");
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(stdout_json(&o)["error"]["kind"], json!("usage"));
    }
}

#[test]
fn several_inputs_give_an_array() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/");
    let o = freemetric(
        &[
            "validate",
            "--in",
            &format!("{dir}validate.json"),
            "--in",
            &format!("{dir}metric_corrupted.json"),
        ],
        "",
    );
    let v = stdout_json(&o);
    assert_eq!(v[0], json!({ "valid": true }));
    assert_eq!(v[1]["violation"]["axiom"], json!("triangle"));
}

#[test]
fn proptest_reports_seed_and_trials() {
    let o = freemetric(&["proptest", "fvf", "--trials", "7", "--seed", "11"], "");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout_json(&o),
        json!({ "suite": "fvf", "seed": 11, "trials": 7, "passed": 7, "status": "pass" })
    );
}
