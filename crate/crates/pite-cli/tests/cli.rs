//! Behavior of the `pite` binary: exit codes, config files, and output
//! shapes. Statistical behavior is covered by the acceptance suite.

use std::path::Path;
use std::process::{Command, Output};

fn pite(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pite"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary must launch")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process should exit normally")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn write(dir: &Path, name: &str, content: &str) {
    std::fs::write(dir.join(name), content).unwrap();
}

/// A tiny valid trial: y depends on x and z, arms of five. Covariates are
/// continuous so no permutation can make the design matrix lose rank.
const SMALL_TRIAL: &str = "\
y,trt,x,z
1.2,1,0.5,0.2
0.4,1,-0.3,1.1
2.1,1,1.4,-0.4
0.8,1,0.1,0.8
1.5,1,0.9,0.3
0.3,0,0.4,1.6
-0.2,0,-0.8,0.5
0.9,0,1.1,-0.9
0.1,0,-0.2,0.4
0.6,0,0.7,1.2
";

#[test]
fn unknown_flags_and_subcommands_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(exit_code(&pite(dir.path(), &["test", "--no-such-flag"])), 2);
    assert_eq!(exit_code(&pite(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn missing_required_flags_exit_2_with_guidance() {
    let dir = tempfile::tempdir().unwrap();
    let out = pite(dir.path(), &["test", "--data", "d.csv"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("--outcome"), "stderr: {}", stderr(&out));
}

#[test]
fn unreadable_or_invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = pite(dir.path(), &["test", "--config", "absent.json"]);
    assert_eq!(exit_code(&out), 2);

    write(dir.path(), "broken.json", "{ not json");
    let out = pite(dir.path(), &["test", "--config", "broken.json"]);
    assert_eq!(exit_code(&out), 2);

    // Unknown field names are configuration errors, not silent ignores.
    write(
        dir.path(),
        "typo.json",
        r#"{"data": "d.csv", "outcome": "y", "treatment": "trt", "permtuations": 10}"#,
    );
    let out = pite(dir.path(), &["test", "--config", "typo.json"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("permtuations"), "stderr: {}", stderr(&out));
}

#[test]
fn config_file_and_flags_are_mutually_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "trial.csv", SMALL_TRIAL);
    write(
        dir.path(),
        "cfg.json",
        r#"{"data": "trial.csv", "outcome": "y", "treatment": "trt"}"#,
    );
    let out = pite(dir.path(), &["test", "--config", "cfg.json", "--alpha", "0.1"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("--alpha"), "stderr: {}", stderr(&out));
}

#[test]
fn malformed_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // Treatment value 2 is not a 0/1 label.
    write(dir.path(), "bad_trt.csv", "y,trt,x\n1,2,0.5\n2,0,0.3\n3,1,0.1\n4,0,0.2\n5,1,0.6\n");
    let out = pite(
        dir.path(),
        &["test", "--data", "bad_trt.csv", "--outcome", "y", "--treatment", "trt"],
    );
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr(&out));

    // An empty cell is a data error too.
    write(dir.path(), "hole.csv", "y,trt,x\n1,1,0.5\n,1,0.3\n3,1,0.1\n4,0,0.2\n5,0,0.6\n");
    let out = pite(
        dir.path(),
        &["test", "--data", "hole.csv", "--outcome", "y", "--treatment", "trt"],
    );
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr(&out));
}

#[test]
fn rank_deficient_design_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    // `flat` is constant, so the design matrix loses rank next to the
    // intercept.
    let mut rows = String::from("y,trt,x,flat\n");
    for i in 0..12 {
        rows.push_str(&format!("{}.5,{},0.{},1\n", i, i % 2, (i * 7) % 10));
    }
    write(dir.path(), "flat.csv", &rows);
    let out = pite(
        dir.path(),
        &["test", "--data", "flat.csv", "--outcome", "y", "--treatment", "trt", "--seed", "1"],
    );
    assert_eq!(exit_code(&out), 4, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("rank deficient"), "stderr: {}", stderr(&out));
}

#[test]
fn flags_and_equivalent_config_file_produce_identical_documents() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "trial.csv", SMALL_TRIAL);
    let flags = pite(
        dir.path(),
        &[
            "test", "--data", "trial.csv", "--outcome", "y", "--treatment", "trt", "--model",
            "rf", "--trees", "25", "--max-depth", "4", "--nsplit", "5", "--min-leaf", "2",
            "--permutations", "40", "--alpha", "0.1", "--seed", "7", "--out", "by_flags.json",
        ],
    );
    assert_eq!(exit_code(&flags), 0, "stderr: {}", stderr(&flags));

    write(
        dir.path(),
        "cfg.json",
        r#"{
            "data": "trial.csv", "outcome": "y", "treatment": "trt",
            "model": "rf", "trees": 25, "max_depth": 4, "nsplit": 5, "min_leaf": 2,
            "permutations": 40, "alpha": 0.1, "seed": 7
        }"#,
    );
    let cfg = pite(dir.path(), &["test", "--config", "cfg.json", "--out", "by_config.json"]);
    assert_eq!(exit_code(&cfg), 0, "stderr: {}", stderr(&cfg));

    let a = std::fs::read(dir.path().join("by_flags.json")).unwrap();
    let b = std::fs::read(dir.path().join("by_config.json")).unwrap();
    assert_eq!(a, b, "flag-built and config-built documents differ");
}

#[test]
fn report_goes_to_stdout_without_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "trial.csv", SMALL_TRIAL);
    let out = pite(
        dir.path(),
        &[
            "test", "--data", "trial.csv", "--outcome", "y", "--treatment", "trt",
            "--permutations", "20", "--seed", "3",
        ],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["tool"], "pite");
    assert_eq!(doc["command"], "test");
    assert_eq!(doc["config"]["seed"], 3);
    assert_eq!(doc["config"]["model"]["kind"], "linear");
    assert_eq!(doc["result"]["permuted_sds"].as_array().unwrap().len(), 20);
    assert!(doc["version"].as_str().unwrap().contains('.'));
}

#[test]
fn sd_file_has_header_comment_and_one_sd_per_line() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "trial.csv", SMALL_TRIAL);
    let out = pite(
        dir.path(),
        &[
            "test", "--data", "trial.csv", "--outcome", "y", "--treatment", "trt",
            "--permutations", "30", "--seed", "3", "--out", "r.json", "--sd-out", "sds.txt",
        ],
    );
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("sds.txt")).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# observed_sd = "), "header: {header}");

    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    let observed = doc["result"]["observed"]["sd"].as_f64().unwrap();
    let header_sd: f64 = header.trim_start_matches("# observed_sd = ").parse().unwrap();
    assert_eq!(header_sd, observed);

    let sds: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    assert_eq!(sds.len(), 30);
    let from_doc: Vec<f64> = doc["result"]["permuted_sds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(sds, from_doc);
}

#[test]
fn generate_round_trips_into_test_and_screen() {
    let dir = tempfile::tempdir().unwrap();
    let gen = pite(
        dir.path(),
        &[
            "generate", "--kind", "null", "--n", "120", "--seed", "5", "--out", "null.csv",
            "--sidecar", "null.json",
        ],
    );
    assert_eq!(exit_code(&gen), 0, "stderr: {}", stderr(&gen));

    let sidecar: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("null.json")).unwrap()).unwrap();
    assert_eq!(sidecar["config"]["kind"], "null");
    assert_eq!(sidecar["config"]["seed"], 5);
    assert_eq!(sidecar["result"]["n"], 120);
    assert!(sidecar["result"]["truth"].is_null());

    let test = pite(
        dir.path(),
        &[
            "test", "--data", "null.csv", "--outcome", "y", "--treatment", "trt",
            "--permutations", "50", "--seed", "8", "--out", "report.json",
        ],
    );
    assert_eq!(exit_code(&test), 0, "stderr: {}", stderr(&test));

    let screen = pite(
        dir.path(),
        &["screen", "--data", "null.csv", "--outcome", "y", "--treatment", "trt"],
    );
    assert_eq!(exit_code(&screen), 0, "stderr: {}", stderr(&screen));
    let doc: serde_json::Value = serde_json::from_slice(&screen.stdout).unwrap();
    assert_eq!(doc["result"]["interactions"].as_array().unwrap().len(), 5);
}

#[test]
fn generated_covariates_are_echoed_in_the_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let gen = pite(
        dir.path(),
        &[
            "generate", "--kind", "als", "--n", "60", "--target-effect-size", "0.19",
            "--seed", "2", "--out", "als.csv", "--sidecar", "als.json",
        ],
    );
    assert_eq!(exit_code(&gen), 0, "stderr: {}", stderr(&gen));
    let sidecar: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("als.json")).unwrap()).unwrap();
    let covariates: Vec<&str> = sidecar["result"]["covariates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(
        covariates,
        ["respiratory_rate", "systolic_bp", "age", "delta_flag", "limb_only", "male", "riluzole"]
    );
    let truth = &sidecar["result"]["truth"];
    assert_eq!(truth["true_effect"].as_array().unwrap().len(), 60);
    assert_eq!(truth["delta"].as_array().unwrap().len(), 7);
}

#[test]
fn simulate_rejects_grids_of_the_wrong_kind() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "power_grid.json",
        r#"{
            "label": "power cells",
            "master_seed": 1,
            "cells": [{
                "design": {"kind": "als", "n": 60, "target_effect_size": 0.38, "spread": "spread"},
                "predictor": {"kind": "linear"},
                "n_permutations": 20,
                "replications": 5,
                "alpha": 0.05
            }]
        }"#,
    );
    let out = pite(dir.path(), &["simulate-type1", "--config", "power_grid.json"]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("constant-effect"), "stderr: {}", stderr(&out));
}

#[test]
fn checkpoints_resume_and_reject_foreign_experiments() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "grid.json",
        r#"{
            "label": "resume check",
            "master_seed": 9,
            "cells": [
                {
                    "design": {"kind": "null", "n": 40},
                    "predictor": {"kind": "linear"},
                    "n_permutations": 40,
                    "replications": 10,
                    "alpha": 0.05
                },
                {
                    "design": {"kind": "null", "n": 60},
                    "predictor": {"kind": "linear"},
                    "n_permutations": 40,
                    "replications": 10,
                    "alpha": 0.05
                }
            ]
        }"#,
    );
    let first = pite(
        dir.path(),
        &[
            "simulate-type1", "--config", "grid.json", "--out", "full.json", "--csv", "full.csv",
            "--checkpoint", "ck.json",
        ],
    );
    assert_eq!(exit_code(&first), 0, "stderr: {}", stderr(&first));

    // Resume with every cell finished: no recomputation, identical document.
    let resumed = pite(
        dir.path(),
        &[
            "simulate-type1", "--config", "grid.json", "--out", "resumed.json", "--checkpoint",
            "ck.json",
        ],
    );
    assert_eq!(exit_code(&resumed), 0, "stderr: {}", stderr(&resumed));
    assert!(stderr(&resumed).contains("resuming"), "stderr: {}", stderr(&resumed));
    let full = std::fs::read(dir.path().join("full.json")).unwrap();
    let again = std::fs::read(dir.path().join("resumed.json")).unwrap();
    assert_eq!(full, again, "resumed run produced a different document");

    // A checkpoint from another experiment must be refused.
    let mut foreign: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("ck.json")).unwrap()).unwrap();
    foreign["master_seed"] = serde_json::json!(1234);
    write(dir.path(), "foreign.json", &foreign.to_string());
    let rejected = pite(
        dir.path(),
        &["simulate-type1", "--config", "grid.json", "--checkpoint", "foreign.json"],
    );
    assert_eq!(exit_code(&rejected), 2, "stderr: {}", stderr(&rejected));

    // The flat CSV has one header plus one row per cell.
    let csv = std::fs::read_to_string(dir.path().join("full.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("cell,design,model,n,"));
    assert!(lines[1].starts_with("0,null,linear,40,"));
    assert!(lines[2].starts_with("1,null,linear,60,"));
}

#[test]
fn forest_tuning_flags_require_the_forest_model() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "trial.csv", SMALL_TRIAL);
    let out = pite(
        dir.path(),
        &[
            "test", "--data", "trial.csv", "--outcome", "y", "--treatment", "trt", "--trees",
            "10",
        ],
    );
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("rf"), "stderr: {}", stderr(&out));
}
