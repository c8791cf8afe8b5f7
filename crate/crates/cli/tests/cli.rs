use std::path::{Path, PathBuf};

use atomguard_cli::{discover_corpus, run_with, EXIT_ERROR, EXIT_OK, EXIT_VIOLATIONS};

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs/samples").join(name)
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs/corpus")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("atomguard").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn respected_contract_exits_zero() {
    let (code, out, _) = run(&["check", path_str(&sample("atomic_entry.mg"))]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "OK: contract respected\n");
}

#[test]
fn violation_report_names_lines_and_fix() {
    let (code, out, _) = run(&["check", path_str(&sample("ambiguous_branch.mg"))]);
    assert_eq!(code, EXIT_VIOLATIONS);
    assert!(out.contains("module M / run"), "{out}");
    assert!(out.contains("ambiguous_branch.mg:11  a (in run)"), "{out}");
    assert!(out.contains("ambiguous_branch.mg:22  b (in g)"), "{out}");
    assert!(out.contains("suggestion: make run atomic"), "{out}");
    assert!(out.ends_with("FAIL: 1 violation(s)\n"), "{out}");
}

#[test]
fn json_output_is_valid_and_dumps_go_to_stderr() {
    let (code, out, err) = run(&["--format", "json", "--dump-grammar", "check", path_str(&sample("scheduler.mg"))]);
    assert_eq!(code, EXIT_VIOLATIONS);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["violations"][0]["suggestion"], "make schedule atomic");
    assert!(err.contains("== grammar:"), "{err}");
}

#[test]
fn dumps_print_grammar_table_and_trees() {
    let (code, out, _) = run(&[
        "check",
        "--dump-grammar",
        "--dump-table",
        "--dump-trees",
        path_str(&sample("ambiguous_branch.mg")),
    ]);
    assert_eq!(code, EXIT_VIOLATIONS);
    for needle in ["== grammar:", "Start: @run", "== simplified grammar:", "== parse table:", "State 0:", "== parse trees:", "-- a b"] {
        assert!(out.contains(needle), "missing {needle:?} in\n{out}");
    }
}

#[test]
fn missing_file_and_bad_arguments_exit_two() {
    let (code, _, err) = run(&["check", "/nonexistent/x.mg"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("cannot read"), "{err}");
    assert_eq!(run(&["check"]).0, EXIT_ERROR);
    assert_eq!(run(&["--max-clause-len", "0", "check", path_str(&sample("scheduler.mg"))]).0, EXIT_ERROR);
}

#[test]
fn syntax_error_exits_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("broken.mg");
    std::fs::write(&f, "thread void run() { m.a( }\n").unwrap();
    let (code, _, err) = run(&["check", path_str(&f)]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("broken.mg:1"), "{err}");
}

#[test]
fn points_to_and_class_scope_flags_change_results() {
    let conn = corpus().join("connection.bad.mg");
    assert_eq!(run(&["check", path_str(&conn)]).1.matches("violation:").count(), 2);
    assert_eq!(run(&["--class-scope", "check", path_str(&conn)]).1.matches("violation:").count(), 1);
    let (_, out, _) = run(&["--no-points-to", "check", path_str(&conn)]);
    assert!(!out.contains("[instance"), "{out}");
}

#[test]
fn corpus_runs_all_pairs() {
    let (code, out, _) = run(&["corpus", path_str(&corpus())]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("15/15 pairs passed"), "{out}");
}

#[test]
fn corpus_names_a_pair_whose_fixed_variant_still_fails() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(sample("scheduler.mg"), dir.path().join("sched.bad.mg")).unwrap();
    std::fs::copy(sample("scheduler.mg"), dir.path().join("sched.fixed.mg")).unwrap();
    let (code, out, _) = run(&["corpus", path_str(dir.path())]);
    assert_eq!(code, EXIT_VIOLATIONS);
    assert!(out.contains("failing: sched"), "{out}");
}

#[test]
fn empty_or_unpaired_corpus_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["corpus", path_str(dir.path())]).0, EXIT_ERROR);
    assert!(discover_corpus(dir.path()).is_err());
    std::fs::copy(sample("scheduler.mg"), dir.path().join("lone.bad.mg")).unwrap();
    let (code, _, err) = run(&["corpus", path_str(dir.path())]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("lone.fixed.mg"), "{err}");
}

#[test]
fn binary_exit_code_matches_library() {
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_atomguard"))
        .arg("check")
        .arg(sample("scheduler.mg"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_VIOLATIONS));
    assert!(String::from_utf8_lossy(&status.stdout).contains("make schedule atomic"));
}
