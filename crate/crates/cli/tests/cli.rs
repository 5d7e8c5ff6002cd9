//! End-to-end tests of the `rsfkit` binary: every subcommand, the
//! documented exit codes, and the sample program files.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../samples")
        .join(name)
}

fn rsfkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsfkit"))
        .args(args)
        .env_remove("RSFKIT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn check_accepts_the_examples() {
    for name in ["naturals.rsf", "delay.rsf", "relay.rsf"] {
        let out = rsfkit(&["check", sample(name).to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{name}: {}", stdout(&out));
        assert_eq!(stdout(&out), "well-typed\n");
    }
}

#[test]
fn check_rejects_with_named_clauses() {
    let cases = [
        ("double_read.rsf", "not readable"),
        ("unwritten_output.rsf", "never written"),
        ("double_write.rsf", "not writable"),
    ];
    for (name, needle) in cases {
        let out = rsfkit(&["check", sample(name).to_str().unwrap()]);
        assert_eq!(code(&out), 1, "{name}");
        let text = stdout(&out);
        assert!(text.starts_with("ill-typed"), "{name}: {text}");
        assert!(text.contains(needle), "{name}: {text}");
    }
}

#[test]
fn parse_errors_exit_2() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "(program (inputs nat]").unwrap();
    let out = rsfkit(&["check", file.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));

    let out = rsfkit(&["check", "/nonexistent/file.rsf"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_2() {
    let out = rsfkit(&["frobnicate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn run_naturals_counts_to_ten() {
    let out = rsfkit(&[
        "run",
        sample("naturals.rsf").to_str().unwrap(),
        "--steps",
        "10",
    ]);
    assert_eq!(code(&out), 0);
    let expected: String = (0..10).map(|i| format!("{i}\n")).collect();
    assert_eq!(stdout(&out), expected);
}

#[test]
fn run_delay_shifts_inputs() {
    let mut rows = tempfile::NamedTempFile::new().unwrap();
    write!(rows, "5\n7\n9\n").unwrap();
    let out = rsfkit(&[
        "run",
        sample("delay.rsf").to_str().unwrap(),
        "--steps",
        "3",
        "--inputs",
        rows.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "0\n5\n7\n");
}

#[test]
fn run_rejects_steps_beyond_inputs() {
    let mut rows = tempfile::NamedTempFile::new().unwrap();
    writeln!(rows, "5").unwrap();
    let out = rsfkit(&[
        "run",
        sample("delay.rsf").to_str().unwrap(),
        "--steps",
        "3",
        "--inputs",
        rows.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn run_requires_inputs_when_declared() {
    let out = rsfkit(&[
        "run",
        sample("delay.rsf").to_str().unwrap(),
        "--steps",
        "3",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn normalize_prints_a_reads_then_writes_chain() {
    let out = rsfkit(&["normalize", sample("naturals.rsf").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    // All get positions precede the arr, which precedes all sets.
    let get = text.find("(get").expect("a get");
    let arr = text.find("(arr").expect("an arr");
    let set = text.find("(set").expect("a set");
    assert!(get < arr && arr < set, "{text}");
}

#[test]
fn normalized_program_still_runs_identically() {
    let out = rsfkit(&["normalize", sample("delay.rsf").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let term = stdout(&out);
    let original = std::fs::read_to_string(sample("delay.rsf")).unwrap();
    let program = original.replace(
        original
            .split("(term ")
            .nth(1)
            .and_then(|s| s.strip_suffix("))\n"))
            .expect("term section"),
        term.trim(),
    );
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(file, "{program}").unwrap();
    let mut rows = tempfile::NamedTempFile::new().unwrap();
    write!(rows, "5\n7\n9\n").unwrap();
    let out = rsfkit(&[
        "run",
        file.path().to_str().unwrap(),
        "--steps",
        "3",
        "--inputs",
        rows.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), "0\n5\n7\n");
}

#[test]
fn translate_prints_a_loop_normal_form() {
    let out = rsfkit(&["translate", sample("naturals.rsf").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("(loop"), "{text}");
    assert!(!text.contains("(get"), "{text}");
}

#[test]
fn translate_rejects_ill_typed_programs() {
    let out = rsfkit(&["translate", sample("unwritten_output.rsf").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn laws_pass_with_fixed_seed_and_are_reproducible() {
    let a = rsfkit(&["laws", "--samples", "25", "--seed", "7"]);
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    let b = rsfkit(&["laws", "--samples", "25", "--seed", "7"]);
    assert_eq!(stdout(&a), stdout(&b));
    for line in stdout(&a).lines() {
        assert!(line.starts_with("LAW "), "{line}");
        if line.contains("-neg-") {
            assert!(line.contains(" FAIL "), "negative must record failures: {line}");
        } else {
            assert!(line.contains(" PASS "), "positive must pass: {line}");
        }
    }
}

#[test]
fn laws_seed_env_var_is_honored() {
    let via_flag = rsfkit(&["laws", "--samples", "10", "--seed", "99"]);
    let via_env = Command::new(env!("CARGO_BIN_EXE_rsfkit"))
        .args(["laws", "--samples", "10"])
        .env("RSFKIT_SEED", "99")
        .output()
        .expect("binary runs");
    assert_eq!(stdout(&via_flag), String::from_utf8_lossy(&via_env.stdout));
}

#[test]
fn crosscheck_passes_on_the_examples() {
    for name in ["naturals.rsf", "delay.rsf", "relay.rsf"] {
        let out = rsfkit(&[
            "crosscheck",
            sample(name).to_str().unwrap(),
            "--steps",
            "20",
            "--samples",
            "3",
            "--seed",
            "11",
        ]);
        assert_eq!(code(&out), 0, "{name}: {}", stdout(&out));
        assert!(stdout(&out).contains("PASS"));
    }
}

#[test]
fn crosscheck_rejects_ill_typed_programs() {
    let out = rsfkit(&[
        "crosscheck",
        sample("double_read.rsf").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("not well-typed"));
}
