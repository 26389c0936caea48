//! End-to-end checks of the binary: exit codes and file outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SAT_CNF: &str = "p cnf 2 2\n1 2 0\n-1 -2 0\n";
const UNSAT_CNF: &str = "p cnf 1 2\n1 0\n-1 0\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sbt3dt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn reduce_emit_collapse_replay_roundtrip() {
    let dir = TempDir::new().unwrap();
    let cnf = path(&dir, "f.cnf");
    let tdt = path(&dir, "f.3dt");
    let meta = path(&dir, "f.meta");
    let perm = path(&dir, "f.perm");
    let trace = path(&dir, "f.trace");
    std::fs::write(&cnf, SAT_CNF).unwrap();

    let out = run(&["reduce", arg(&cnf), "-o", arg(&tdt), "--meta", arg(&meta)]);
    assert!(out.status.success(), "{out:?}");

    let out = run(&["emit-perm", arg(&tdt), "--meta", arg(&meta), "-o", arg(&perm)]);
    assert!(out.status.success(), "{out:?}");

    let out = run(&["check-equiv", arg(&tdt), arg(&perm)]);
    assert!(out.status.success(), "{out:?}");

    let out = run(&["collapse", arg(&tdt), "--trace", arg(&trace)]);
    assert!(out.status.success(), "{out:?}");

    // Replaying the collapse trace on the emitted permutation sorts it.
    let out = run(&["replay", arg(&trace), arg(&perm)]);
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0 1 2 3"), "{text}");

    let out = run(&["sort", arg(&perm), "--mode", "decision"]);
    assert!(out.status.success(), "{out:?}");
}

#[test]
fn unsatisfiable_formula_yields_no_on_both_sides() {
    let dir = TempDir::new().unwrap();
    let cnf = path(&dir, "u.cnf");
    let tdt = path(&dir, "u.3dt");
    let meta = path(&dir, "u.meta");
    let perm = path(&dir, "u.perm");
    std::fs::write(&cnf, UNSAT_CNF).unwrap();

    run(&["reduce", arg(&cnf), "-o", arg(&tdt), "--meta", arg(&meta)]);
    run(&["emit-perm", arg(&tdt), "--meta", arg(&meta), "-o", arg(&perm)]);

    let out = run(&["collapse", arg(&tdt)]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");

    let out = run(&["sort", arg(&perm), "--mode", "decision"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn verify_reports_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let sat = path(&dir, "s.cnf");
    std::fs::write(&sat, SAT_CNF).unwrap();
    let out = run(&["verify", arg(&sat)]);
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("satisfiable: yes"), "{text}");
    assert!(text.contains("outcome: verified"), "{text}");

    // An assignment that falsifies the formula is rejected with exit 1.
    let out = run(&["verify", arg(&sat), "--assignment", "00"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let out = run(&["verify", arg(&sat), "--assignment", "10"]);
    assert!(out.status.success(), "{out:?}");
}

#[test]
fn sort_modes_agree_on_a_small_permutation() {
    let dir = TempDir::new().unwrap();
    let perm = path(&dir, "p.perm");
    std::fs::write(&perm, "0 3 1 2 5 4 6\n").unwrap();
    for mode in ["exact", "oracle"] {
        let out = run(&["sort", arg(&perm), "--mode", mode]);
        assert!(out.status.success(), "{out:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.trim(), "distance 2", "mode {mode}: {text}");
    }
}

#[test]
fn behavior_writes_dot() {
    let dir = TempDir::new().unwrap();
    let dot = path(&dir, "or.dot");
    let out = run(&["behavior", "or", "--dot", arg(&dot)]);
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"), "{text}");
}

#[test]
fn usage_and_format_errors() {
    let out = run(&["sort"]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.perm");
    std::fs::write(&bad, "0 2 2 1\n").unwrap();
    let out = run(&["sort", arg(&bad), "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(4), "{out:?}");
    let out = run(&["sort", arg(&path(&dir, "missing")), "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(4), "{out:?}");
}
