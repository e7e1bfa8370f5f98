//! The user-facing binary contract: exit codes, config-file handling, and
//! the report-to-file split. Heavy runs live in the acceptance gate; these
//! invocations stay small.

use std::process::{Command, Output};

fn symgrpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symgrpd"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code (signal?)")
}

#[test]
fn unsupported_pairs_exit_2_with_a_diagnostic() {
    let out = symgrpd(&["run", "--suite", "varpi", "--group", "heisenberg3"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Ad-invariant pairing"), "diagnostic missing: {err}");

    let out = symgrpd(&["run", "--suite", "reduction", "--group", "su2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_and_config_errors_exit_64() {
    for args in [
        &["run", "--grid-n", "100"][..],
        &["run", "--tol", "bogus=1e-6"][..],
        &["run", "--trials", "0"][..],
        &["convergence", "--suite", "finite-basics", "--fd-steps", "1e-2,1e-3"][..],
        &["convergence", "--suite", "varpi", "--group", "su2"][..],
    ] {
        let out = symgrpd(args);
        assert_eq!(code(&out), 64, "args {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(code(&symgrpd(&["--help"])), 0);
}

#[test]
fn tolerance_failures_exit_1_and_say_fail() {
    let out = symgrpd(&[
        "run", "--suite", "finite-basics", "--group", "su2", "--trials", "2", "--tol",
        "finite-basics=1e-30",
    ]);
    assert_eq!(code(&out), 1);
    let doc = String::from_utf8_lossy(&out.stdout);
    assert!(doc.contains("pass = false"), "record should fail: {doc}");
}

#[test]
fn config_file_keys_apply_and_flags_override_them() {
    let dir = std::env::temp_dir();
    let cfg = dir.join("symgrpd-cli-test.cfg");
    std::fs::write(
        &cfg,
        "# comment\nsuite = finite-basics\ngroup = torus2\ntrials = 3 # inline\nseed = 7\n",
    )
    .expect("config written");
    let out = symgrpd(&["run", "--config", cfg.to_str().expect("utf8 path")]);
    assert_eq!(code(&out), 0);
    let doc = String::from_utf8_lossy(&out.stdout);
    assert!(doc.contains("group = torus2") && doc.contains("trials = 3"), "{doc}");

    let out = symgrpd(&[
        "run", "--config", cfg.to_str().expect("utf8 path"), "--group", "abelian2",
    ]);
    let doc = String::from_utf8_lossy(&out.stdout);
    assert!(doc.contains("group = abelian2"), "flag should win: {doc}");
    let _ = std::fs::remove_file(&cfg);
}

#[test]
fn report_flag_splits_document_and_summary() {
    let dir = std::env::temp_dir();
    let path = dir.join("symgrpd-cli-test-report.txt");
    let out = symgrpd(&[
        "run", "--suite", "loop-basics", "--group", "abelian2", "--grid-n", "32", "--trials",
        "2", "--report",
        path.to_str().expect("utf8 path"),
    ]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS loop-basics/holonomy"), "summary lines on stdout: {stdout}");
    assert!(!stdout.contains("paper_anchor"), "full document belongs in the file: {stdout}");
    let doc = std::fs::read_to_string(&path).expect("report written");
    assert!(doc.starts_with("# symgrpd verification report\n"));
    assert!(doc.contains("paper_anchor") && doc.contains("runtime_ms = 0"));
    let _ = std::fs::remove_file(&path);
}
