//! External-interface contracts of the binary: JSON config files with
//! flag overrides, the seed environment variable, and the exit-code /
//! machine-readable failure protocol.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robustgen"))
}

#[test]
fn config_file_supplies_flags_and_explicit_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        r#"{ "family": "beta", "alpha": 0.1, "beta": 0.1, "dim": 3, "n": 50, "seed": 11 }"#,
    )
    .unwrap();

    // Config alone.
    let out_a = dir.path().join("a");
    let status = bin()
        .args(["datagen", "--config"])
        .arg(&config_path)
        .arg("--out-dir")
        .arg(&out_a)
        .arg("--quiet")
        .status()
        .unwrap();
    assert!(status.success());
    let a = std::fs::read_to_string(out_a.join("samples.csv")).unwrap();
    assert_eq!(a.lines().count(), 50);
    assert_eq!(a.lines().next().unwrap().split(',').count(), 3);

    // Explicit --n overrides the file; everything else still comes from it.
    let out_b = dir.path().join("b");
    let status = bin()
        .args(["datagen", "--config"])
        .arg(&config_path)
        .args(["--n", "20", "--out-dir"])
        .arg(&out_b)
        .arg("--quiet")
        .status()
        .unwrap();
    assert!(status.success());
    let b = std::fs::read_to_string(out_b.join("samples.csv")).unwrap();
    assert_eq!(b.lines().count(), 20);
    // Same seed and family: the shorter run is a prefix of the longer one.
    assert!(a.starts_with(&b));
}

#[test]
fn seed_env_var_applies_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str], env_seed: Option<&str>, out: &std::path::Path| {
        let mut cmd = bin();
        cmd.args(args).arg("--out-dir").arg(out).arg("--quiet");
        match env_seed {
            Some(s) => cmd.env("ROBUSTGEN_SEED", s),
            None => cmd.env_remove("ROBUSTGEN_SEED"),
        };
        assert!(cmd.status().unwrap().success());
        std::fs::read_to_string(out.join("samples.csv")).unwrap()
    };
    let base = &["datagen", "--family", "uniform", "--dim", "2", "--n", "10"];
    let env9 = run(base, Some("9"), &dir.path().join("env9"));
    let flag9 = run(
        &["datagen", "--family", "uniform", "--dim", "2", "--n", "10", "--seed", "9"],
        None,
        &dir.path().join("flag9"),
    );
    assert_eq!(env9, flag9, "env seed must match the equivalent flag");
    // Flag beats a conflicting env var.
    let flag_wins = run(
        &["datagen", "--family", "uniform", "--dim", "2", "--n", "10", "--seed", "9"],
        Some("1234"),
        &dir.path().join("flagwins"),
    );
    assert_eq!(flag_wins, flag9);
    let env_other = run(base, Some("1234"), &dir.path().join("env1234"));
    assert_ne!(env_other, flag9);
}

#[test]
fn usage_errors_exit_nonzero_with_json_summary() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["mc-verify", "--stat", "bhc", "--trials", "0", "--out-dir"])
        .arg(dir.path())
        .arg("--quiet")
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    let parsed: serde_json::Value =
        serde_json::from_str(stderr.lines().last().unwrap()).expect("stderr ends in JSON");
    assert_eq!(parsed["status"], "error");
    assert!(parsed["message"].as_str().unwrap().contains("trials"));
}

#[test]
fn failed_check_exits_1_with_fail_summary() {
    // A decay constant far below the simulated distribution's true 1/Z
    // violates the decay hypothesis, so the formula undershoots and the
    // simulation check must report the failure.
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args([
            "prop3", "--alpha", "1", "--beta", "0.3", "--c", "1e-9", "--n", "20000", "--delta",
            "0.5", "--simulate", "--trials", "400", "--k-max", "50", "--seed", "3", "--quiet",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    let parsed: serde_json::Value =
        serde_json::from_str(stderr.lines().last().unwrap()).expect("stderr ends in JSON");
    assert_eq!(parsed["status"], "fail");
    assert!(parsed["failures"].as_array().unwrap()[0]
        .as_str()
        .unwrap()
        .contains("exceeds the bound"));
    // The CSV row records the failing comparison.
    let csv = std::fs::read_to_string(dir.path().join("prop3.csv")).unwrap();
    assert!(csv.trim_end().ends_with("false"));
}

#[test]
fn unknown_statistic_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["mc-verify", "--stat", "nonsense", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("nonsense"));
}
