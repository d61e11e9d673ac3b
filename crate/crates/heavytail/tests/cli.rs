//! CLI surface: exit codes, flag overrides, and output placement.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_heavytail-est")
}

#[test]
fn run_succeeds_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("geom.cfg");
    std::fs::write(&config, "experiment = geometry_tables\ntrials = 1\n").unwrap();
    let out = dir.path().join("geom.csv");
    let result = Command::new(bin())
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("wrote"));
    assert!(out.exists());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# schema=1\n"));
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    std::fs::write(&config, "experiment = mom_vs_empirical\ntrials = nope\n").unwrap();
    let result = Command::new(bin())
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(stderr.contains("trials"), "stderr: {stderr}");
}

#[test]
fn missing_config_file_exits_one() {
    let result = Command::new(bin())
        .args(["run", "--config", "/definitely/not/here.cfg"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("geom.cfg");
    std::fs::write(&config, "experiment = geometry_tables\ntrials = 1\n").unwrap();
    // A path component that is a regular file cannot become a directory.
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "file").unwrap();
    let out = blocker.join("sub").join("out.csv");
    let result = Command::new(bin())
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn flag_overrides_reach_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("mom.cfg");
    std::fs::write(
        &config,
        "experiment = mom_vs_empirical\ntrials = 50\nseed = 1\nn = 120\nk = 4\ndist = gaussian\n",
    )
    .unwrap();
    let out = dir.path().join("mom.csv");
    let result = Command::new(bin())
        .args(["run", "--config"])
        .arg(&config)
        .args(["--trials", "2", "--seed", "9", "--n", "60"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(result.status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("# seed=9 trials=2"), "csv header: {csv}");
    let data_rows = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("trial"))
        .count();
    assert_eq!(data_rows, 2);
}
