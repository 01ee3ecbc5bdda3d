use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn actr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_actr"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_passes_on_counting() {
    let o = actr(&[
        "check",
        fixture("counting.actr").to_str().unwrap(),
        "--depth",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn check_emits_json_lines() {
    let o = actr(&[
        "check",
        fixture("counting.actr").to_str().unwrap(),
        "--depth",
        "3",
        "--format",
        "jsonl",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let first = stdout(&o).lines().next().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn seeded_run_reproduces_the_worked_derivation() {
    let o = actr(&[
        "run",
        fixture("counting.actr").to_str().unwrap(),
        "--seed",
        "1",
        "--depth",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "trace: no; apply(inc)"), "{out}");
    assert!(out.contains("step 2: apply(inc) -> "));
}

#[test]
fn parse_errors_carry_a_span() {
    let o = actr(&["parse", fixture("broken.actr").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("broken.actr:6:21:"), "{err}");
    assert!(stdout(&o).is_empty());
}

#[test]
fn validation_errors_exit_with_one() {
    let o = actr(&["parse", fixture("invalid.actr").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("variable `Z` occurs on the right-hand side only"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(actr(&[]).status.code(), Some(2));
    assert_eq!(
        actr(&["run", "x.actr", "--depth", "deep"]).status.code(),
        Some(2)
    );
    assert_eq!(
        actr(&["check", "x.actr", "--dedup", "fuzzy"]).status.code(),
        Some(2)
    );
}

#[test]
fn missing_input_is_a_diagnostic() {
    let o = actr(&["parse", "/nonexistent/model.actr"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn translate_writes_next_to_the_model_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("counting.actr");
    std::fs::copy(fixture("counting.actr"), &model).unwrap();
    let o = actr(&["translate", model.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let chr = std::fs::read_to_string(dir.path().join("counting.chr")).unwrap();
    assert_eq!(chr.lines().count(), 2);
    assert!(chr.starts_with("inc @ delta(D), gamma(goal,C_goal,E_goal)"));
    assert_eq!(
        chr.lines().last().unwrap(),
        "no @ gamma(B,C,D) <=> D > 0 | gamma(B,C,0)."
    );
}

#[test]
fn explore_formats() {
    let path = fixture("counting.actr");
    let dot = stdout(&actr(&[
        "explore",
        path.to_str().unwrap(),
        "--depth",
        "2",
        "--format",
        "dot",
    ]));
    assert!(dot.starts_with("digraph states {"));
    assert_eq!(dot.matches(" -> ").count(), 2);
    let trace = stdout(&actr(&[
        "explore",
        path.to_str().unwrap(),
        "--depth",
        "4",
        "--format",
        "trace",
    ]));
    let labels: Vec<&str> = trace
        .lines()
        .map(|l| l.split(' ').nth(1).unwrap())
        .collect();
    assert_eq!(labels, ["-no->", "-apply(inc)->", "-no->", "-apply(inc)->"]);
    let exact = stdout(&actr(&[
        "explore",
        path.to_str().unwrap(),
        "--depth",
        "4",
        "--dedup",
        "exact",
    ]));
    assert!(exact.contains("state 4"));
}

#[test]
fn normalize_prints_a_parseable_model() {
    let o = actr(&["normalize", fixture("counting.actr").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let model = actr_chr::parse_model(&stdout(&o)).unwrap();
    assert_eq!(model.rules.len(), 1);
}

#[test]
fn stuck_requests_still_pass_the_check() {
    let o = actr(&[
        "check",
        fixture("counting.actr").to_str().unwrap(),
        "--depth",
        "6",
        "--fail-request",
        "stuck",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
