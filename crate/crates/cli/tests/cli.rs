use std::fs;
use std::process::Command;

fn lagbandit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lagbandit"))
}

const CONFIG: &str = r#"
kind = "single_agent_exp3"
horizon = 2000
output = "OUT"
[seeds]
count = 2
root = 5
[delay]
kind = "constant"
delay = 3
[algorithm]
arms = 2
[adversary]
kind = "fixed_losses"
losses = [0.2, 0.8]
"#;

#[test]
fn run_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, CONFIG.replace("OUT", &out.display().to_string())).unwrap();
    let status = lagbandit().arg("run").arg(&cfg).env("LAGBANDIT_WORKERS", "2").status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("summary.csv").exists());
    assert!(out.join("manifest.toml").exists());
}

#[test]
fn config_problems_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, CONFIG.replace("OUT", "x").replace("arms = 2", "arms = 2\neta = 0.5")).unwrap();
    assert_eq!(lagbandit().arg("run").arg(&cfg).status().unwrap().code(), Some(1));
    assert_eq!(lagbandit().arg("run").arg(tmp.path().join("missing.toml")).status().unwrap().code(), Some(1));
    fs::write(&cfg, CONFIG.replace("OUT", &tmp.path().join("o").display().to_string())).unwrap();
    let status = lagbandit().arg("run").arg(&cfg).env("LAGBANDIT_WORKERS", "zero").status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn sweep_runs_each_value() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, CONFIG.replace("OUT", &out.display().to_string())).unwrap();
    let status = lagbandit()
        .args(["sweep", cfg.to_str().unwrap(), "--param", "delay.delay", "--values", "1,4,16"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for v in ["1", "4", "16"] {
        assert!(out.join(format!("delay.delay={v}")).join("summary.csv").exists());
    }
}

#[test]
fn unknown_tier_is_rejected() {
    assert_eq!(lagbandit().args(["accept", "--tier", "slow"]).status().unwrap().code(), Some(1));
}
