use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdestream"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(run(&["experiment", "--k-mem", "4"]).status.code(), Some(2));
    assert_eq!(run(&["experiment", "--no-such-flag", "1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--config", "/nonexistent/cfg.txt"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.txt");
    fs::write(&cfg, "problem = ks\nnot_a_key = 3\n").unwrap();
    assert_eq!(run(&["experiment", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn divergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("snaps");
    let o = run(&[
        "simulate",
        "--problem",
        "w2d",
        "--amplitude",
        "1e4",
        "--steps",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_then_identify() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = dir.path().join("snaps");
    let res = dir.path().join("res");
    let o = run(&["simulate", "--problem", "ks", "--steps", "120", "--out", snaps.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(snaps.join("manifest.txt").exists());
    assert_eq!(fs::read_dir(&snaps).unwrap().count(), 121);

    // problem and dt come from the manifest
    let o = run(&["identify", "--source", snaps.to_str().unwrap(), "--out", res.to_str().unwrap(), "--truth"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("tpr 1.000"), "{stdout}");
    let csv = fs::read_to_string(res.join("ks_k21_identify.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 120 - 20);
    assert!(csv.starts_with("step,t,lambda,support_size,tpr,e2,objective,regret_cum,wall_ms,"));
}

#[test]
fn verify_passes_on_ks() {
    let o = run(&["verify", "--problem", "ks"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
