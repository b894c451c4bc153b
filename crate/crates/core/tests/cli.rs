//! End-to-end runs of the `offmoo` binary.

use std::path::Path;
use std::process::{Command, Output};

fn offmoo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offmoo"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("the binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generate_optimize_estimate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&offmoo(
        &[
            "generate",
            "--problem",
            "ZDT1",
            "--n",
            "200",
            "--seed",
            "3",
            "--out",
            "data.csv",
        ],
        d,
    ));
    let text = ok(&offmoo(
        &[
            "optimize",
            "--data",
            "data.csv",
            "--objective",
            "pess",
            "--K",
            "2",
            "--iters",
            "20",
            "--restarts",
            "1",
            "--out",
            "pol.txt",
        ],
        d,
    ));
    assert!(text.contains("wrote 2 policies"));
    let table = ok(&offmoo(
        &[
            "estimate",
            "--data",
            "data.csv",
            "--policy-file",
            "pol.txt",
            "--estimator",
            "pess",
        ],
        d,
    ));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "policy,objective,value,width");
    // 2 policies x 2 objectives
    assert_eq!(lines.len(), 5);
    for line in &lines[1..] {
        let v: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn sweep_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let text = ok(&offmoo(
        &[
            "sweep",
            "--out",
            "res",
            "--set",
            "data.n=50",
            "--set",
            "sweep.K=2",
            "--set",
            "sweep.runs=2",
            "--set",
            "sweep.methods=random,pessHVI",
            "--set",
            "optimizer.iterations=5",
            "--set",
            "optimizer.restarts=1",
            "--set",
            "sweep.reference_policies=50",
            "--set",
            "sweep.eval_contexts=50",
        ],
        d,
    ));
    assert!(text.contains("(0 failed)"), "{text}");
    let csv = std::fs::read_to_string(d.join("res/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(d.join("res/config.ini").exists());
    ok(&offmoo(
        &["plot", "--csv", "res/results.csv", "--x", "n", "--out", "plot.svg"],
        d,
    ));
    assert!(std::fs::read_to_string(d.join("plot.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn errors_exit_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = offmoo(
        &["estimate", "--data", "missing.csv", "--policy-file", "p.txt"],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
    let out = offmoo(&["sweep", "--set", "sweep.bogus=1", "--out", "x"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn quick_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&offmoo(&["verify", "--quick"], dir.path()));
    assert!(text.lines().count() >= 6);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}
