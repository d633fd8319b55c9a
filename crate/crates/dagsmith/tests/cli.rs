//! End-to-end tests of the `dagsmith` binary: argument handling, exit codes,
//! and the files each subcommand writes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn dagsmith(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dagsmith"))
        .args(args)
        .env("DAGSMITH_WORKERS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by signal")
}

#[test]
fn list_names_every_problem_with_its_signature() {
    let out = dagsmith(&["list"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    for name in [
        "days-between",
        "prefix-paths",
        "filter-bounds",
        "number-io",
        "median",
        "smallest",
        "negative-to-zero",
        "vector-average",
        "compare-string-lengths",
        "replace-space-with-newline",
    ] {
        assert!(text.contains(name), "missing problem `{name}` in:\n{text}");
    }
    assert!(text.contains("days_between(dt1: DateTime, dt2: DateTime) -> Int"));
}

#[test]
fn help_and_version_exit_zero() {
    let help = dagsmith(&["--help"]);
    assert_eq!(exit_code(&help), 0);
    assert!(stdout(&help).contains("Usage"));
    let version = dagsmith(&["--version"]);
    assert_eq!(exit_code(&version), 0);
}

#[test]
fn argument_errors_exit_one() {
    // Missing subcommand, missing required flag, and an unknown flag are all
    // usage errors, not crashes.
    for args in [&[][..], &["run"][..], &["list", "--bogus"][..]] {
        let out = dagsmith(args);
        assert_eq!(exit_code(&out), 1, "args {args:?} should be a usage error");
    }
}

#[test]
fn unknown_problem_is_a_usage_error() {
    let out = dagsmith(&["run", "--problem", "no-such-problem"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("unknown problem"));
}

#[test]
fn bad_configuration_is_rejected_before_running() {
    let out = dagsmith(&["run", "--problem", "smallest", "--umad-rate", "1.5"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("bad configuration"));

    let out = dagsmith(&["bench", "--problem", "smallest", "--runs", "0"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("--runs must be positive"));
}

#[test]
fn compile_prints_the_dag_and_the_source() {
    let dir = tempdir().expect("tempdir");
    let path = dir.path().join("genome.txt");
    fs::write(&path, "input:dt2\ninput:dt1\nsub_dt_dt\nTimeDelta.days\nabs\n")
        .expect("write genome");
    let out = dagsmith(&["compile", "--problem", "days-between", "--genome", path_str(&path)]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("Abs : Int\n"), "unexpected dump:\n{text}");
    assert!(text.contains("def days_between(dt1, dt2):"));
    assert!(text.contains("    return abs(sub(dt1, dt2).days())"));
}

#[test]
fn compile_reports_inexpressible_genomes_without_failing() {
    let dir = tempdir().expect("tempdir");
    let path = dir.path().join("genome.txt");
    // A lone Str constant can never satisfy the Int return type.
    fs::write(&path, "const:Str:\"x\"\n").expect("write genome");
    let out = dagsmith(&["compile", "--problem", "days-between", "--genome", path_str(&path)]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout(&out), "COMPILE-FAILURE\n");
}

#[test]
fn compile_rejects_missing_files_and_bad_genes() {
    let out = dagsmith(&["compile", "--problem", "median", "--genome", "/no/such/file"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("cannot read"));

    let dir = tempdir().expect("tempdir");
    let path = dir.path().join("genome.txt");
    fs::write(&path, "not-a-registered-expression\n").expect("write genome");
    let out = dagsmith(&["compile", "--problem", "median", "--genome", path_str(&path)]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("genome parse failed"));
}

#[test]
fn run_writes_a_report_and_exits_with_the_outcome() {
    let dir = tempdir().expect("tempdir");
    let out = dagsmith(&[
        "run",
        "--problem",
        "days-between",
        "--seed",
        "1",
        "--pop",
        "300",
        "--gens",
        "40",
        "--out",
        path_str(dir.path()),
    ]);
    let code = exit_code(&out);
    assert!(code == 0 || code == 2, "unexpected exit {code}: {}", stderr(&out));
    assert!(stdout(&out).contains("days-between seed=1"));

    let report_path = dir.path().join("days-between_1.json");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).expect("report written"))
            .expect("report is JSON");
    assert_eq!(report["problem"], "days-between");
    assert_eq!(report["seed"], 1);
    assert_eq!(report["config"]["population_size"], 300);
    assert!(report["history"].is_array());

    // Exit 0 means a generalizing solution, which always comes with source.
    let generalizes = report["generalizes"].as_bool().expect("generalizes is a bool");
    assert_eq!(code == 0, generalizes);
    if generalizes {
        let src = fs::read_to_string(dir.path().join("days-between_1.src")).expect("source file");
        assert!(src.starts_with("def days_between(dt1, dt2):"));
        assert_eq!(report["source"].as_str().expect("source in report"), src);
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("temp path is UTF-8")
}
