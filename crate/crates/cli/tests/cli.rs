use std::process::{Command, Output};

use serde_json::Value;

fn tablecount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tablecount"))
        .args(args)
        .env_remove("TABLECOUNT_SEED")
        .output()
        .unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = tablecount(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("elapsed_ms");
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn count_and_fy() {
    let v = json_ok(&["count", "--rows", "2,2", "--cols", "2,2"]);
    assert_eq!(v["result"]["count"], "3");
    assert_eq!(v["command"], "count");
    let v = json_ok(&["fy", "--rows", "2,2", "--cols", "2,2"]);
    assert_eq!(v["result"]["value"], "3/2");
    let v = json_ok(&["count01", "--rows", "2,2,2", "--cols", "2,2,2"]);
    assert_eq!(v["result"]["count"], "6");
}

#[test]
fn estimate_covers_exact_value() {
    let v = json_ok(&[
        "estimate", "--rows", "2,2,2", "--cols", "2,2,2", "--samples", "100000", "--seed", "42",
    ]);
    let r = &v["result"];
    assert!(r["ci_low"].as_f64().unwrap() <= 21.0 && 21.0 <= r["ci_high"].as_f64().unwrap());
    assert_eq!(v["seed"], 42);
    assert_eq!(r["num_samples"], 100000);
}

#[test]
fn mismatched_totals_exit_2_naming_both() {
    let out = tablecount(&["count", "--rows", "2,2", "--cols", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.trim().lines().count(), 1);
    let err: Value = serde_json::from_str(stderr.trim()).unwrap();
    let msg = err["message"].as_str().unwrap();
    assert!(msg.contains('4') && msg.contains('3'), "{msg}");
}

#[test]
fn budget_errors_exit_3() {
    let out = tablecount(&["count", "--rows", "8,8,8", "--cols", "8,8,8", "--exact-budget", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let out = tablecount(&["estimate", "--rows", "12,12", "--cols", "12,12"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_are_json() {
    for args in [
        vec!["nonsense"],
        vec!["estimate", "--rows", "1,1", "--cols", "1,1", "--samples", "1"],
        vec!["lowrank", "--rows", "1,1", "--cols", "1,1", "--epsilon", "1.5"],
        vec!["count", "--rows", "1,x", "--cols", "1,1"],
    ] {
        let out = tablecount(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert!(err["message"].is_string());
    }
}

#[test]
fn output_is_deterministic_apart_from_timing() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["estimate", "--rows", "2,1,2", "--cols", "1,2,2", "--samples", "3000"],
        vec!["variance", "--rows", "2,2", "--cols", "2,2", "--samples", "3000", "--seed", "9"],
        vec!["lowrank", "--rows", "2,2", "--cols", "1,2,1", "--samples", "50", "--repeats", "3"],
        vec!["lowrank01", "--rows", "2,2", "--cols", "1,2,1", "--samples", "50"],
        vec!["verify-coeffs", "--degree", "2", "--vars", "3", "--samples", "200"],
        vec!["compare", "--rows", "2,1", "--cols", "1,2", "--samples", "500"],
    ];
    for args in cases {
        let mut a = json_ok(&args);
        let mut b = json_ok(&args);
        strip_timing(&mut a);
        strip_timing(&mut b);
        assert_eq!(a.to_string(), b.to_string(), "{args:?}");
    }
}

#[test]
fn seed_environment_variable_is_a_fallback() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_tablecount"));
        cmd.args(["estimate", "--rows", "1,1", "--cols", "1,1", "--samples", "100"]).args(extra);
        cmd.env_remove("TABLECOUNT_SEED");
        if let Some(s) = env {
            cmd.env("TABLECOUNT_SEED", s);
        }
        let v: Value = serde_json::from_slice(&cmd.output().unwrap().stdout).unwrap();
        v["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, &[]), tablecount::rng::DEFAULT_SEED);
    assert_eq!(run(Some("77"), &[]), 77);
    assert_eq!(run(Some("77"), &["--seed", "5"]), 5);
}

#[test]
fn compare_lists_every_method() {
    let v = json_ok(&["compare", "--rows", "1,1,1,1", "--cols", "1,1,1,1", "--samples", "2000"]);
    let rows = v["result"]["methods"].as_array().unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(names, ["exact", "fy", "bekessy", "montecarlo", "lowrank"]);
    assert_eq!(rows[0]["value"], "24");
    assert_eq!(rows[1]["rel_error"], 0.0);
    assert_eq!(rows[2]["rel_error"], 0.0);

    let v = json_ok(&["compare", "--rows", "2,2", "--cols", "2,2", "--samples", "2000"]);
    let bek = v["result"]["methods"][2]["rel_error"].as_f64().unwrap();
    assert!((bek - (2.4731 / 3.0 - 1.0f64).abs()).abs() < 1e-3);
    let table = tablecount(&["compare", "--rows", "2,2", "--cols", "2,2", "--output", "table"]);
    assert!(String::from_utf8(table.stdout).unwrap().starts_with("method"));
}

#[test]
fn files_and_weights() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("m.json");
    std::fs::write(&json_path, r#"{"rows":[2,1],"cols":[1,2],"weights":[[1,1],[1,1]]}"#).unwrap();
    let csv_path = dir.path().join("m.csv");
    std::fs::write(&csv_path, "2,1\n1,2\n").unwrap();
    let a = json_ok(&["count", "--margins-file", json_path.to_str().unwrap()]);
    let b = json_ok(&["count", "--margins-file", csv_path.to_str().unwrap()]);
    assert_eq!(a["result"], b["result"]);
    assert_eq!(a["result"]["count"], "2");

    let v = json_ok(&["weighted", "--fy", "--margins-file", json_path.to_str().unwrap(), "--samples", "500"]);
    let fy = json_ok(&["fy", "--rows", "2,1", "--cols", "1,2"]);
    assert_eq!(v["result"]["weighted_fy"].as_f64().unwrap(), fy["result"]["approx"].as_f64().unwrap());

    let w_path = dir.path().join("w.csv");
    std::fs::write(&w_path, "1,0\n2,3\n").unwrap();
    let v = json_ok(&[
        "lowrank", "--rows", "2,1", "--cols", "1,2", "--weights-file", w_path.to_str().unwrap(),
        "--samples", "20",
    ]);
    assert!(v["result"]["value"].as_f64().unwrap() >= 0.0);
    let out = tablecount(&["lowrank", "--rows", "2,1", "--cols", "1,2", "--weights-file", w_path.to_str().unwrap(), "--rank-bound", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_coeffs_saves_and_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let save = dir.path().join("h.json");
    let dump = dir.path().join("h.txt");
    let a = json_ok(&[
        "verify-coeffs", "--degree", "2", "--vars", "3", "--samples", "300", "--seed", "4",
        "--save", save.to_str().unwrap(), "--dump-poly", dump.to_str().unwrap(),
    ]);
    assert_eq!(a["result"]["monomials_checked"], 6);
    assert_eq!(std::fs::read_to_string(&dump).unwrap().lines().count(), 6);
    let b = json_ok(&["verify-coeffs", "--load", save.to_str().unwrap()]);
    assert_eq!(a["result"]["min_ratio"], b["result"]["min_ratio"]);
    assert_eq!(a["result"]["max_ratio"], b["result"]["max_ratio"]);
}

#[test]
fn permanent_of_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    std::fs::write(&path, "1,2\n3,4\n").unwrap();
    let v = json_ok(&["permanent", "--matrix-file", path.to_str().unwrap()]);
    assert_eq!(v["result"]["permanent"], 10.0);
}

#[test]
fn column_sets() {
    let v = json_ok(&["lowrank-colsets", "--rows", "2,2", "--sets", "0,1,2;1,3;0,2", "--samples", "20"]);
    assert!(v["result"]["value"].as_f64().unwrap() > 0.0);
    let v = json_ok(&["lowrank-colsets", "--rows", "2", "--sets", "2;", "--samples", "20"]);
    assert_eq!(v["result"]["value"], 0.0);
}
