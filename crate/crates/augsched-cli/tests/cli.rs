//! End-to-end checks of the command-line interface: output contracts,
//! fixture resolution, determinism, and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_augsched"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("augsched-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn opt_prints_the_exact_value() {
    let out = bin()
        .arg("opt")
        .arg(fixtures().join("tiny.json"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "3");
}

#[test]
fn opt_resolves_through_the_fixture_env_var() {
    let out = bin()
        .env("AUGSCHED_FIXTURES", fixtures())
        .args(["opt", "tiny.json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "3");
}

#[test]
fn run_greedy_emits_a_record_with_bound_checks() {
    let out = bin()
        .arg("run")
        .arg(fixtures().join("tiny.json"))
        .args(["--alg", "greedy"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(record["algorithm"], "greedy");
    assert_eq!(record["decisions"].as_array().unwrap().len(), 6);
    let checks = record["bound_checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["holds"] == true));
}

#[test]
fn run_smoothmerge_reports_monte_carlo_columns() {
    let out = bin()
        .arg("run")
        .arg(fixtures().join("tiny.json"))
        .args([
            "--alg",
            "smoothmerge",
            "--pt",
            "0.5",
            "--pg",
            "0.5",
            "--trials",
            "1000",
            "--seed",
            "7",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "algorithm,trials,seed,mean,std_err,opt,bound,holds"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("smoothmerge,1000,7,"));
    assert!(row.ends_with(",true"));
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let trace = fixtures().join("tiny.json");
    let args = [
        "sweep",
        "--trace",
        trace.to_str().unwrap(),
        "--dpoints",
        "4",
        "--trials",
        "16",
        "--seed",
        "5",
        "--params",
        "0.75:0.33,0.5:0.5",
    ];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("d,eta,opt,trust,greedy,"));
    assert_eq!(text.lines().count(), 5);
    // Every cell flags its bound as holding.
    for line in text.lines().skip(1) {
        assert!(line.ends_with("true"), "{line}");
    }
}

#[test]
fn adversary_reports_the_greedy_case_one_numbers() {
    let out = bin()
        .args([
            "adversary",
            "--lemma",
            "two-value",
            "--alg",
            "greedy",
            "--delta",
            "2",
            "--k",
            "2",
            "--epsilon",
            "0.2",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("two-value,greedy,0,Case1,2,3"), "{text}");
}

#[test]
fn ingest_writes_the_json_instance() {
    let out_path = scratch("golden.json");
    let out = bin()
        .arg("ingest")
        .arg(fixtures().join("golden.swf"))
        .arg("-o")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "jobs=5 kept=3 dropped=2 k=30 delta=6");
    let opt = bin().arg("opt").arg(&out_path).output().unwrap();
    assert_eq!(stdout(&opt).trim(), "40"); // [0,10) beats [3,8), plus [12,42)
}

#[test]
fn tradeoff_contains_the_balanced_row() {
    let out = bin().args(["tradeoff", "--grid", "2"]).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("0.500000,0.500000,0.250000,0.333333"));
}

#[test]
fn usage_errors_exit_with_code_two() {
    let out = bin().args(["run", "--alg", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_parameters_exit_with_code_one() {
    let out = bin()
        .arg("run")
        .arg(fixtures().join("tiny.json"))
        .args(["--alg", "semitas"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_supplies_defaults() {
    let config = scratch("defaults.cfg");
    std::fs::write(&config, "tau=1.5\nseed=3\n").unwrap();
    let out = bin()
        .arg("run")
        .arg(fixtures().join("tiny.json"))
        .args(["--alg", "semitas", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(record["seed"], 3);
}
