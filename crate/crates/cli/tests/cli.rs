use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal-lab")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const SMALL: [&str; 6] = ["--n", "20", "--trials", "4", "--seed", "3"];

#[test]
fn list_names_every_experiment() {
    let o = lab(&["list"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 12);
    assert!(out.lines().any(|l| l == "green-comparison"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&lab(&["no-such-experiment"])), 2);
    assert_eq!(code(&lab(&[])), 2);
    assert_eq!(code(&lab(&["wgw", "--format", "xml"])), 2);
    let o = lab(&["wgw", "--n", "3"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("nodal-lab: "));
}

#[test]
fn passing_run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = vec!["detection-consistency", "--out", out, "--quiet"];
    args.extend(SMALL);
    let o = lab(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(dir.path().join("detection-consistency.csv")).unwrap();
    assert!(csv.starts_with("trial,seed,"));
    assert_eq!(csv.lines().count(), 5);
    assert!(dir.path().join("detection-consistency.long.csv").exists());
}

#[test]
fn failing_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "experiment = detection-consistency\nn = 20\ntrials = 2\nthreshold.min_pass_freq = 1.1\n").unwrap();
    let o = lab(&["--config", conf.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().contains("[FAIL]"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# small run\nexperiment = wgw\nn = 20\ntrials = 7\nseed = 1\n").unwrap();
    let out = dir.path().to_str().unwrap();
    let o = lab(&["--config", conf.to_str().unwrap(), "--trials", "2", "--format", "json", "--out", out, "-q"]);
    assert!(code(&o) <= 1, "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("wgw.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["trials"], 2);
    assert_eq!(json["config"]["n"], 20);
    assert_eq!(json["config"]["master_seed"], 1);
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
    // the positional name must agree with the file
    assert_eq!(code(&lab(&["sticking", "--config", conf.to_str().unwrap()])), 2);
}

#[test]
fn worker_count_does_not_change_output() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (d, w) in dirs.iter().zip(["1", "2"]) {
        let mut args = vec!["sticking", "--workers", w, "--out", d.path().to_str().unwrap(), "-q"];
        args.extend(SMALL);
        assert!(code(&lab(&args)) <= 1);
    }
    let read = |k: usize| std::fs::read_to_string(dirs[k].path().join("sticking.csv")).unwrap();
    assert_eq!(read(0), read(1));
}

#[test]
fn config_parse_error_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "experiment = wgw\nn = 20\ntrials = many\n").unwrap();
    let o = lab(&["--config", conf.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.conf") && err.contains('3'), "{err}");
}
