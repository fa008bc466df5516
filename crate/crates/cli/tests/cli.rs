use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn ltspace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltspace"))
        .args(args)
        .current_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")))
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn params_k9_csv_has_the_table_rows_and_one_extra() {
    let out = ltspace(&["params", "--k", "9", "--gcd-one", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(lines.iter().filter(|l| l.ends_with(",in-table")).count(), 6);
    assert_eq!(lines.iter().filter(|l| l.ends_with(",extra")).count(), 1);
    assert!(lines.contains(&"9,2,2,17,17,289,36,1156,\"1^5,2^2\",in-table"));
}

#[test]
fn params_json_round_trips_rows() {
    let out = ltspace(&["params", "--k", "10,11", "--gcd-one", "--format", "json"]);
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert!(rows.iter().any(|r| r["v"] == 1431 && r["x"] == 2 && r["tag"] == "in-table"));
    assert!(rows.iter().all(|r| r["k"] == 10 || r["k"] == 11));
}

#[test]
fn search_cyclic_91_gives_one_class() {
    let out = ltspace(&["search", "--group", "builtin:table1-line2", "--k", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["complete"], true);
    assert_eq!(v["classes"].as_array().unwrap().len(), 1);
    assert!(v["report"].get("elapsed_secs").is_none());
}

#[test]
fn search_output_is_thread_independent() {
    let run = |t: &str| {
        Command::new(env!("CARGO_BIN_EXE_ltspace"))
            .args(["search", "--group", "builtin:plane-z57", "--k", "8"])
            .env("LTSPACE_THREADS", t)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn timings_flag_adds_elapsed() {
    let out = ltspace(&["search", "--group", "builtin:plane-z7", "--k", "3", "--timings"]);
    assert!(json(&out)["report"]["elapsed_secs"].is_number());
}

#[test]
fn verify_fano_ok() {
    let out = ltspace(&["verify", "--design", "tests/data/fano.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["linear_space"]["valid"], true);
    assert_eq!(v["linear_space"]["r"], 3);
    assert_eq!(v["linear_space"]["b"], 7);
}

#[test]
fn verify_with_group() {
    let out = ltspace(&["verify", "--design", "tests/data/fano.json", "--group", "builtin:plane-z7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["group_action"]["line_regular"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(ltspace(&["verify", "--design", "tests/data/broken.json"]).status.code(), Some(4));
    assert_eq!(ltspace(&["verify", "--design", "tests/data/missing.json"]).status.code(), Some(1));
    assert_eq!(ltspace(&["params", "--k", "9", "--frobnicate"]).status.code(), Some(1));
    assert_eq!(ltspace(&["params", "--k", "2"]).status.code(), Some(1));
    assert_eq!(ltspace(&["search", "--group", "builtin:nope", "--k", "3"]).status.code(), Some(1));
    // 45 pair orbits cannot be C(9,2) = 36
    let out = ltspace(&["search", "--group", "builtin:table1-line2", "--k", "9"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["report"]["infeasible"], "orbit-count-mismatch");
    let out = ltspace(&["search", "--group", "builtin:table1-line3", "--k", "10", "--time-budget", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["report"]["complete"], false);
    assert_eq!(ltspace(&["--help"]).status.code(), Some(0));
}

#[test]
fn reproduce_json_and_budget() {
    let out = ltspace(&["reproduce", "--entries", "table3-line24", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["entries"][0]["outcome"], "pass");
    let out = ltspace(&["reproduce", "--entries", "table1-line3", "--budget", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains("| inconclusive |"));
    assert_eq!(ltspace(&["reproduce", "--entries", "no-such-entry"]).status.code(), Some(1));
}

#[test]
fn catalog_listing() {
    let out = ltspace(&["catalog", "--format", "json"]);
    let v = json(&out);
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"table1-line4"));
    assert!(ids.contains(&"table3-line38"));
    let text = String::from_utf8(ltspace(&["catalog"]).stdout).unwrap();
    assert!(text.contains("id: table1-line1"));
}

#[test]
fn types_csv() {
    let out = ltspace(&["types", "--k", "10", "--x", "4", "--c", "41", "--d", "11", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "type\n\"1^2,2^4\"\n\"1^5,2,3\"\n");
}
