use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_winmdp")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();
    let doc = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), doc, stderr)
}

#[test]
fn threshold_decisions_set_the_exit_code() {
    let file = data("escape_coin.mdp");
    let base = ["check", &file, "--objective", "dfw-par", "--lambda", "3", "--state", "s"];
    let (code, doc, _) = run(&[&base[..], &["--threshold", "3/4"]].concat());
    assert_eq!(code, 0);
    assert_eq!(doc["value"], "3/4");
    assert_eq!(doc["decision"], "yes");
    assert_eq!(doc["confidence"], "exact");
    assert_eq!(doc["model_hash"].as_str().unwrap().len(), 64);

    let (code, doc, _) = run(&[&base[..], &["--threshold", "4/5"]].concat());
    assert_eq!(code, 1);
    assert_eq!(doc["decision"], "no");
}

#[test]
fn errors_exit_with_two() {
    let file = data("escape_coin.mdp");
    let (code, _, err) = run(&["check", &file, "--objective", "dfw-mp", "--lambda", "3", "--state", "s"]);
    assert_eq!(code, 2);
    assert!(err.contains("error"));
    let (code, _, _) = run(&["check", &file, "--objective", "dfw-par", "--lambda", "3", "--state", "nowhere"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["check", &file, "--objective", "dfw-par", "--state", "s"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["check", "/does/not/exist.mdp", "--objective", "bw-par", "--state", "s"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn syntax_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.mdp");
    std::fs::write(&path, "mdp par\nstate s priority 1\naction s a\n  s 1/2\n  s two\n").unwrap();
    let (code, _, err) = run(&["check", path.to_str().unwrap(), "--objective", "bw-par", "--state", "s"]);
    assert_eq!(code, 2);
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn bounded_mean_payoff_reports_cap() {
    let file = data("three_state_cycle_mp.mdp");
    let (code, doc, _) =
        run(&["check", &file, "--objective", "bw-mp", "--state", "s1", "--cap", "4", "--threshold", "1/2"]);
    assert_eq!(code, 3);
    assert_eq!(doc["decision"], "inconclusive");
    assert_eq!(doc["confidence"], "bounded_by_cap");
    assert_eq!(doc["mec_report"][0]["status"], "not_good_within_cap");
}

#[test]
fn classify_reports_safe_regions() {
    let file = data("answer_the_branch.mdp");
    let (code, doc, _) = run(&["classify", &file, "--kind", "par", "--lambda", "5"]);
    assert_eq!(code, 0);
    let mec = &doc["mec_report"][0];
    assert_eq!(mec["status"], "good");
    assert_eq!(mec["safe_region"].as_array().unwrap().len(), 14);

    let (_, doc, _) = run(&["classify", &file, "--kind", "par", "--bounded"]);
    assert_eq!(doc["mec_report"][0]["lambda_star"], 5);

    let (_, doc, _) = run(&["classify", &data("three_state_cycle.mdp"), "--kind", "par", "--bounded"]);
    assert_eq!(doc["mec_report"][0]["status"], "not_good");
}

#[test]
fn exported_strategy_simulates() {
    let dir = tempfile::tempdir().unwrap();
    let strat = dir.path().join("sigma.json");
    let file = data("answer_the_branch.mdp");
    let (code, doc, _) = run(&[
        "check",
        &file,
        "--objective",
        "dfw-par",
        "--lambda",
        "5",
        "--state",
        "s1",
        "--strategy-out",
        strat.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["value"], "1/1");
    let (code, doc, _) = run(&[
        "simulate",
        &file,
        "--objective",
        "dfw-par",
        "--lambda",
        "5",
        "--state",
        "s1",
        "--samples",
        "2000",
        "--horizon",
        "60",
        "--seed",
        "3",
        "--strategy",
        strat.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["estimate"].as_f64().unwrap(), 1.0);
    assert_eq!(doc["samples"], 2000);
}

#[test]
fn simulation_is_reproducible() {
    let file = data("escape_coin.mdp");
    let args = [
        "simulate", &file, "--objective", "fw-par", "--lambda", "2", "--state", "s", "--samples", "500", "--horizon",
        "40", "--seed", "11",
    ];
    let (_, a, _) = run(&args);
    let (_, b, _) = run(&args);
    assert_eq!(a["estimate"], b["estimate"]);
}

#[test]
fn oracle_agrees_with_solver() {
    let (code, doc, _) = run(&["oracle", &data("escape_coin_mp.mdp"), "--objective", "dfw-mp", "--lambda", "2"]);
    assert_eq!(code, 0);
    assert_eq!(doc["agrees_with_solver"], true);
    assert_eq!(doc["values"][0]["value"], "1/2");
}

#[test]
fn help_succeeds() {
    let out = Command::new(env!("CARGO_BIN_EXE_winmdp")).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("check"));
}

#[test]
fn almost_sure_and_zero_thresholds() {
    let (code, doc, _) = run(&[
        "check",
        &data("escape_coin.mdp"),
        "--objective",
        "fw-par",
        "--lambda",
        "1",
        "--state",
        "s",
        "--threshold",
        "1/1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(doc["value"], "1/1");

    let (code, doc, _) = run(&[
        "check",
        &data("three_state_cycle.mdp"),
        "--objective",
        "bw-par",
        "--state",
        "s1",
        "--threshold",
        "1/100",
    ]);
    assert_eq!(code, 1);
    assert_eq!(doc["value"], "0/1");
}
