use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dwtqft")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn mult_n_file() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/data/multiplication_by_n.json").to_string()
}

#[test]
fn check_passes_for_untwisted_s3() {
    let out = run(&["check", "--group", "S3", "--cocycle", "trivial"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["result"]["checks_passed"], v["result"]["checks_total"]);
    assert!(v["residuals"].as_array().unwrap().len() > 40);
}

#[test]
fn hilbert_and_partition_values() {
    let v = json_of(&run(&["hilbert", "--group", "C2", "--cocycle", "trivial", "--genus", "2"]));
    assert_eq!(v["result"]["dimension"], 16);
    let v = json_of(&run(&["partition", "--group", "C2", "--manifold", "T3"]));
    assert_eq!(v["result"]["exact"], serde_json::json!([4, 1]));
    let v = json_of(&run(&["partition", "--group", "C2", "--manifold", "L(2,1)"]));
    let z = v["result"]["value"].as_array().unwrap();
    assert!((z[0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let v = json_of(&run(&["partition", "--group", "S3", "--manifold", "S3"]));
    assert_eq!(v["result"]["exact"], serde_json::json!([1, 6]));
}

#[test]
fn dgcheck_on_shipped_example() {
    let file = mult_n_file();
    let v = json_of(&run(&["dgcheck", "--file", &file, "--n", "5"]));
    assert_eq!(v["result"]["loop_invariant"], 0);
    let out = run(&["dgcheck", "--file", &file]);
    assert_eq!(out.status.code(), Some(2), "missing --n is a usage error");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["modular", "--group", "C0"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["hilbert", "--group", "C2"]).status.code(), Some(2));
    assert_eq!(run(&["modular", "--group", "C2", "--tol", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["wilson", "--group", "C3", "--cocycle", "cyclic:1", "--genus", "1"]).status.code(), Some(3));
    let big = run(&["modular", "--group", "C300"]);
    assert_eq!(big.status.code(), Some(5), "{}", String::from_utf8_lossy(&big.stderr));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn pi1_file_and_presentation_scope() {
    let dir = std::env::temp_dir().join(format!("dwtqft-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("lens5.json");
    std::fs::write(&path, r#"{"generators": 1, "relators": [[1, 1, 1, 1, 1]]}"#).unwrap();
    let spec = format!("pi1:{}", path.display());
    let v = json_of(&run(&["partition", "--group", "C5", "--manifold", &spec]));
    assert_eq!(v["result"]["exact"], serde_json::json!([1, 1]));
    let out = run(&["partition", "--group", "C5", "--cocycle", "cyclic:2", "--manifold", &spec]);
    assert_eq!(out.status.code(), Some(3));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("dwtqft-out-{}.json", std::process::id()));
    let out = run(&["fusion", "--group", "S3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["labels"].as_array().unwrap().len(), 8);
    std::fs::remove_file(&path).ok();
}

#[test]
fn csv_and_table_formats() {
    let out = run(&["reduce2d", "--group", "C2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("result.table[4],256"));
    let out = run(&["check", "--group", "C3", "--cocycle", "cyclic:1", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["modular.unitarity", "modular.st_cubed", "gluing.g2.product_vs_verlinde", "reduce2d.integrality"] {
        assert!(text.contains(name), "{name}");
    }
    assert!(text.contains("elapsed_ms"));
}

#[test]
fn json_excludes_timing_and_is_stable() {
    let a = run(&["modular", "--group", "D4", "--seed", "3"]).stdout;
    let b = run(&["modular", "--group", "D4", "--seed", "3", "--threads", "2"]).stdout;
    assert_eq!(a, b);
    assert!(!String::from_utf8(a).unwrap().contains("elapsed"));
}

#[test]
fn mapping_torus_and_wilson() {
    let v = json_of(&run(&["mt", "--group", "C2", "--word", "S"]));
    let z = v["result"]["value"].as_array().unwrap();
    assert!((z[0].as_f64().unwrap() - 2.0).abs() < 1e-9);
    let v = json_of(&run(&["wilson", "--group", "C2", "--genus", "1", "--class-fn", "1,-1"]));
    let z = v["result"]["value"].as_array().unwrap();
    // Σ over (commuting pair, h) of sign(h) / 2 = (4 · 1 + 4 · (-1)) · 4 / 2 / 4
    assert!(z[0].as_f64().unwrap().abs() < 1e-12);
}
