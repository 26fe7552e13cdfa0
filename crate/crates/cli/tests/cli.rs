use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mutfan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn g(name: &str) -> String {
    golden(name).to_string_lossy().into_owned()
}

#[test]
fn mutate_prints_mutated_matrix() {
    let v = json_of(&run(&["mutate", "--matrix", &g("B_annulus.json"), "--seq", "1"]));
    assert_eq!(v["rows"], json!([[0, -1, -1], [1, 0, 1], [1, -1, 0]]));
    // twice is the identity
    let v = json_of(&run(&["mutate", "--matrix", &g("B_annulus.json"), "--seq", "3,3"]));
    assert_eq!(v["rows"], json!([[0, 1, 1], [-1, 0, 1], [-1, -1, 0]]));
}

#[test]
fn eta_single_and_batch() {
    let b = g("B_annulus.json");
    let v = json_of(&run(&["eta", "--matrix", &b, "--seq", "2,1", "--vec", "1,0,-1"]));
    assert_eq!(v["image"], json!(["-1", "0", "1"]));
    let out = run(&["eta", "--matrix", &b, "--seq", "2", "--batch", &g("vectors.csv"), "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1,0,-1\n0,-1,0\n-5/2,3,2\n");
}

#[test]
fn separate_returns_shortest_certificate() {
    let v = json_of(&run(&[
        "separate", "--matrix", &g("B_annulus.json"), "--a", "0,1,-1", "--b", "1,-1,0", "--depth", "8",
    ]));
    assert_eq!(v["separated"], json!(true));
    assert_eq!(v["seq"], json!([]));
    assert_eq!(v["coord"], json!(2));
    assert_eq!(v["signs"], json!([1, -1]));
    // compatible rays are never separated
    let out = run(&[
        "separate", "--matrix", &g("B_annulus.json"), "--a", "0,1,-1", "--b", "1,0,-1", "--expect-holds",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["separated"], json!(false));
}

#[test]
fn coherent_and_expect_holds() {
    let args = ["coherent", "--matrix", &g("B_annulus.json"), "--family", &g("family_plus_minus_inf.json")];
    let v = json_of(&run(&args));
    assert_eq!(v["status"], json!("refuted"));
    assert_eq!(v["witness"], json!({"coord": 1, "seq": [2]}));
    let mut strict = args.to_vec();
    strict.push("--expect-holds");
    assert_eq!(run(&strict).status.code(), Some(1));
}

#[test]
fn annulus_curves() {
    let v = json_of(&run(&["annulus", "--family", "2", "--n", "0"]));
    assert_eq!(v["shear"], json!([0, 1, 0]));
    let out = run(&["annulus", "--family", "1", "--n", "2", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1,0,-2\n");
    // identified parameters print the canonical id
    let v = json_of(&run(&["annulus", "--family", "1", "--n", "-1"]));
    assert_eq!(v["id"], json!("2(0)"));
    let rays = json_of(&run(&["annulus", "--rays", "2"]));
    let on_disk: Value = serde_json::from_str(&std::fs::read_to_string(golden("rays_annulus_2.json")).unwrap()).unwrap();
    assert_eq!(rays, on_disk);
}

#[test]
fn shear_of_golden_curves() {
    let t = g("T_annulus.json");
    let v = json_of(&run(&["shear", "--tri", &t, "--curve", &g("curve_lambda1_2.json")]));
    assert_eq!(v["shear"], json!([1, 0, -2]));
    let v = json_of(&run(&["shear", "--tri", &t, "--curve", &g("curve_lambda_inf.json")]));
    assert_eq!(v["shear"], json!([1, 0, -1]));
    // flipping arc 1 applies the first mutation map to (1, 0, -2)
    let v = json_of(&run(&["shear", "--tri", &t, "--curve", &g("curve_lambda1_2.json"), "--flips", "1"]));
    assert_eq!(v["shear"], json!([-1, 1, -1]));
    let d = g("T_digon.json");
    let c = g("curve_digon_spiral.json");
    assert_eq!(json_of(&run(&["shear", "--tri", &d, "--curve", &c]))["shear"], json!([1, 0]));
    let v = json_of(&run(&["shear", "--tri", &d, "--curve", &c, "--flips", "1,2"]));
    assert_eq!(v["shear"], json!([-1, 0]));
}

#[test]
fn nulltangle_refutes_with_certificate() {
    let v = json_of(&run(&[
        "nulltangle", "--matrix", &g("B_annulus.json"), "--tangle", &g("tangle_plus_minus_inf.json"), "--depth", "8",
    ]));
    assert_eq!(v["status"], json!("refuted"));
    assert_eq!(v["witness"]["seq"], json!([2]));
    assert_eq!(v["disorder"], json!(2));
    let v = json_of(&run(&["nulltangle", "--campaign", "40", "--seed", "3"]));
    assert_eq!(v["refuted"], json!(40));
    assert_eq!(v["replayed"], json!(40));
    assert_eq!(v["seed"], json!(3));
}

#[test]
fn fan_build_check_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let fan = dir.path().join("fan.json");
    let fan_s = fan.to_string_lossy().into_owned();
    let out = run(&[
        "fan", "--matrix", &g("B_annulus.json"), "--rays", &g("rays_annulus_2.json"), "--depth", "8", "--out", &fan_s,
        "--expect-holds",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&fan).unwrap()).unwrap();
    assert_eq!(v["check"]["pass"], json!(true));
    assert_eq!(v["truncation"], json!(2));
    let svg = dir.path().join("fan.svg");
    let csv = dir.path().join("fan.csv");
    let out = run(&[
        "fan", "plot", "--fan", &fan_s, "--svg", &svg.to_string_lossy(), "--csv", &csv.to_string_lossy(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with("id,x,y\n"));
    assert_eq!(csv_text.lines().count(), 1 + 15);
    let out = run(&["plot", "--fan", &fan_s, "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), csv_text);
}

#[test]
fn emitted_json_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let ms = m.to_string_lossy().into_owned();
    let out = run(&["mutate", "--matrix", &g("B_annulus.json"), "--seq", "1,2", "--out", &ms]);
    assert!(out.status.success());
    let back = run(&["mutate", "--matrix", &ms, "--seq", "2,1"]);
    let orig: Value = serde_json::from_str(&std::fs::read_to_string(golden("B_annulus.json")).unwrap()).unwrap();
    assert_eq!(json_of(&back), orig);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "rows": [[0, 1], [-1, "x"]]}"#).unwrap();
    let out = run(&["mutate", "--matrix", &bad.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("rows[1][1]") && msg.contains("line 1"), "{msg}");
    std::fs::write(&bad, r#"{"n": 2, "rows": [[0, 1], [1, 0]]}"#).unwrap();
    assert_eq!(run(&["mutate", "--matrix", &bad.to_string_lossy()]).status.code(), Some(2));
    let b = g("B_annulus.json");
    assert_eq!(run(&["eta", "--matrix", &b, "--vec", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["eta", "--matrix", &b, "--vec", "1,2,3", "--seq", "4"]).status.code(), Some(2));
    assert_eq!(run(&["annulus", "--family", "+", "--n", "1"]).status.code(), Some(2));
    assert_eq!(run(&["mutate", "--matrix", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["mutate"]).status.code(), Some(2));
    assert_eq!(run(&["annulus", "--family", "2", "--format", "svg"]).status.code(), Some(2));
}
