//! End-to-end tests of the `rome` binary: exit codes and the REPL.

use std::io::Write;
use std::process::{Command, Stdio};

fn rome() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rome"))
}

fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("rome-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn check_clean_file_exits_zero() {
    let path = write_temp("ok.rome", "four : Nat\nfour = add two two\n");
    let out = rome().args(["check"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn check_kind_error_exits_one() {
    let path = write_temp(
        "bad_kind.rome",
        "type Bad : L\ntype Bad = Pi {}\n",
    );
    let out = rome().args(["check"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error"), "stderr: {}", err);
}

#[test]
fn check_type_error_exits_one() {
    let path = write_temp("bad_type.rome", "x : Nat\nx = tt\n");
    let out = rome().args(["check"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn check_missing_file_exits_two() {
    let out = rome()
        .args(["check", "/definitely/not/a/file.rome"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_prints_constructed_value() {
    let path = write_temp("run.rome", "answer : Nat\nanswer = add one two\n");
    let out = rome().args(["run"]).arg(&path).arg("answer").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        stdout.trim(),
        "in (#'Succ := in (#'Succ := in (#'Succ := in (#'Zero := #'Unit))))"
    );
}

#[test]
fn run_not_true_prints_false_variant() {
    let path = write_temp("run_not.rome", "flipped : Bool\nflipped = not True\n");
    let out = rome().args(["run"]).arg(&path).arg("flipped").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("'False"));
}

#[test]
fn run_divergent_exits_three() {
    let path = write_temp(
        "loop.rome",
        "spin : Nat\nspin = fix (\\x. x)\n",
    );
    let out = rome()
        .args(["run", "--fuel", "100"])
        .arg(&path)
        .arg("spin")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dump_types_prints_declarations() {
    let path = write_temp("dump.rome", "inc : Nat -> Nat\ninc = succ\n");
    let out = rome()
        .args(["check", "--dump-types"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("inc :"), "stdout: {}", stdout);
}

#[test]
fn explain_evidence_prints_solutions() {
    let path = write_temp(
        "explain.rome",
        "both : Pair Nat Bool\nboth = (#'1 := one) ++ (#'2 := True)\n",
    );
    let out = rome()
        .args(["check", "--explain-evidence"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("evidence"), "stdout: {}", stdout);
}

#[test]
fn no_prelude_rejects_prelude_names() {
    let path = write_temp("bare.rome", "x : Nat\nx = one\n");
    let out = rome()
        .args(["check", "--no-prelude"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn repl_types_kinds_and_evaluates() {
    let mut child = rome()
        .arg("repl")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b":k Pair\n:t wand\n:t prj\nnot True\n:q\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Pair : * -> * -> *"), "stdout: {}", stdout);
    assert!(stdout.contains("wand : forall"), "stdout: {}", stdout);
    assert!(stdout.contains("prj : forall"), "stdout: {}", stdout);
    assert!(stdout.contains("#'False := #'Unit"), "stdout: {}", stdout);
}
