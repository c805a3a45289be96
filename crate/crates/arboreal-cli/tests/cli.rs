//! End-to-end checks of the binary: exit codes, envelope discipline and the
//! documented output formats.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arboreal"))
}

fn stdout_of(args: &[&str]) -> (String, i32) {
    let out = bin().args(args).output().expect("binary runs");
    (String::from_utf8(out.stdout).unwrap(), out.status.code().unwrap_or(-1))
}

#[test]
fn params_prints_the_derived_constants() {
    let (out, code) = stdout_of(&["params", "--k", "3", "--beta", "2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let r = &v["results"];
    assert!((r["p_beta"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(r["p_c"].as_f64().unwrap(), 0.5);
    assert_eq!(r["beta_c"].as_f64().unwrap(), 1.0);
    assert!((r["lambda"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(r["regime"], "SUPERCRITICAL");
}

#[test]
fn cylinder_single_edge_value() {
    let (out, code) = stdout_of(&["cylinder", "--k", "3", "--beta", "2", "--edge", "o:0", "--open"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["results"]["limit"].as_f64().unwrap() - 0.6).abs() < 1e-12);
}

#[test]
fn enumerate_triangle() {
    let (out, code) = stdout_of(&["enumerate", "--graph", "triangle", "--beta", "1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["results"]["z"].as_f64().unwrap(), 7.0);
}

#[test]
fn validation_errors_exit_2() {
    let out = bin().args(["params", "--k", "2", "--beta", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["cylinder", "--k", "3", "--beta", "2", "--open", "garbage"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_scale_refusal_exits_3() {
    // R=3 at k=3 has 45 edges, beyond the enumeration cap
    let out = bin()
        .args(["enumerate", "--graph", "ball", "--k", "3", "--r", "3", "--beta", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn envelope_config_reparses() {
    let (out, _) =
        stdout_of(&["cylinder", "--k", "3", "--beta", "2", "--edge", "o:0", "--open", "--r", "8"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    // the embedded config names the command and every resolved field
    assert_eq!(v["config"]["command"], "cylinder");
    assert_eq!(v["config"]["k"], 3);
    assert_eq!(v["config"]["r"], 8);
    assert_eq!(v["config"]["spec"][0], "o:0=open");
}

#[test]
fn sample_streams_ndjson_deterministically() {
    let args = ["sample", "--k", "3", "--beta", "2", "--r", "5", "--n", "5", "--seed", "99"];
    let (a, code) = stdout_of(&args);
    assert_eq!(code, 0);
    let (b, _) = stdout_of(&args);
    assert_eq!(a, b, "same seed, same records");
    let mut lines = 0;
    for line in a.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["seed"], 99);
        assert_eq!(v["r"], 5);
        assert_eq!(v["regime"], "SUPERCRITICAL");
        assert!(v["config"].as_str().unwrap().chars().all(|c| c.is_ascii_hexdigit()));
        assert!(v["open_in_ball1"].as_u64().unwrap() <= 3);
        lines += 1;
    }
    assert_eq!(lines, 5);
}

#[test]
fn sample_threads_do_not_change_records() {
    let base = ["sample", "--k", "3", "--beta", "2", "--r", "5", "--n", "64", "--seed", "7"];
    let (a, _) = stdout_of(&base);
    let mut with_threads: Vec<&str> = base.to_vec();
    with_threads.extend(["--threads", "4"]);
    let (b, _) = stdout_of(&with_threads);
    assert_eq!(a, b);
}

#[test]
fn output_file_and_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["params", "--k", "4", "--beta", "0.3", "--output", "p.json"])
        .env("ARBOREAL_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(dir.path().join("p.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&written).unwrap();
    assert_eq!(v["results"]["regime"], "SUBCRITICAL");
}

#[test]
fn missing_seed_is_drawn_and_printed() {
    let out = bin()
        .args(["sample", "--k", "3", "--beta", "1", "--r", "3", "--n", "1"])
        .output()
        .unwrap();
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("drew seed"), "stderr: {err}");
    // the drawn seed appears in each record
    let stdout = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(stdout.lines().next().unwrap()).unwrap();
    assert!(v["seed"].as_u64().is_some());
}

#[test]
fn couple_reports_zero_violations() {
    let (out, code) = stdout_of(&[
        "couple", "--k", "3", "--betas", "0.5,2,inf", "--r", "4", "--n", "500", "--seed", "3",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["results"]["subset_violations"], 0);
}

#[test]
fn converge_csv_has_documented_columns() {
    let (out, code) = stdout_of(&[
        "converge", "--k", "3", "--beta", "1", "--rs", "2..5", "--edge", "o:0", "--open",
        "--format", "csv",
    ]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "r,exact,limit,gap");
    assert_eq!(lines.count(), 4);
}

#[test]
fn unknown_command_exits_2_with_usage() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.to_lowercase().contains("usage") || err.contains("unrecognized"));
}
