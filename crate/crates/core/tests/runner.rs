use std::fs;
use std::path::Path;

use lagbandit::experiment::artifacts::Manifest;
use lagbandit::experiment::{resolve, run_experiment, sweep, RunConfig};

fn exp3_config(out: &Path) -> String {
    format!(
        r#"
kind = "single_agent_exp3"
horizon = 3000
output = "{}"
[seeds]
count = 3
root = 42
[delay]
kind = "power_law"
alpha = 0.5
[algorithm]
arms = 3
[adversary]
kind = "bernoulli"
means = [0.3, 0.5, 0.6]
seed = 9
"#,
        out.display()
    )
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file() && p.file_name().unwrap() != "timing.toml")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn writes_one_trajectory_per_seed_and_replays_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_experiment(&RunConfig::from_toml(&exp3_config(&a)).unwrap()).unwrap();
    run_experiment(&RunConfig::from_toml(&exp3_config(&b)).unwrap()).unwrap();
    let (fa, fb) = (read_dir(&a), read_dir(&b));
    let names: Vec<&str> = fa.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["manifest.toml", "summary.csv", "trajectory_seed0.csv", "trajectory_seed1.csv", "trajectory_seed2.csv"]);
    for ((na, ca), (_, cb)) in fa.iter().zip(&fb) {
        if na == "manifest.toml" {
            // only the output path differs
            let strip = |c: &[u8]| String::from_utf8_lossy(c).lines().filter(|l| !l.starts_with("output")).collect::<Vec<_>>().join("\n");
            assert_eq!(strip(ca), strip(cb));
        } else {
            assert_eq!(ca, cb, "{na} differs between runs");
        }
    }
    for (name, content) in &fa {
        if name.ends_with(".csv") {
            assert!(String::from_utf8_lossy(content).starts_with("# schema=lagbandit-"), "{name}");
        }
    }
    assert!(a.join("timing.toml").exists());
}

#[test]
fn manifest_resolves_every_auto_value_and_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_toml(&exp3_config(tmp.path())).unwrap();
    run_experiment(&cfg).unwrap();
    let text = fs::read_to_string(tmp.path().join("manifest.toml")).unwrap();
    assert!(!text.contains("\"auto\""), "{text}");
    let manifest = Manifest::from_toml(&text).unwrap();
    assert_eq!(manifest.seeds.len(), 3);
    let explicit = resolve(&manifest.config).unwrap();
    let original = resolve(&cfg).unwrap();
    assert_eq!(explicit.config, original.config);
    assert_eq!(explicit.eta, original.eta);
    assert_eq!(Manifest::from_toml(&manifest.to_toml().unwrap()).unwrap(), manifest);
}

#[test]
fn step_size_above_the_cap_needs_the_clamp_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let text = exp3_config(tmp.path()).replace("arms = 3", "arms = 3\neta = 0.1");
    assert!(run_experiment(&RunConfig::from_toml(&text).unwrap()).is_err());
    assert!(!tmp.path().join("summary.csv").exists());
    let text = text.replace("eta = 0.1", "eta = 0.1\nauto_clamp = true");
    run_experiment(&RunConfig::from_toml(&text).unwrap()).unwrap();
}

#[test]
fn every_experiment_kind_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("single_agent_fkm", r#"[algorithm.body]
shape = "ball"
dim = 2
radius = 1.0
[adversary]
kind = "quadratic"
scale = 0.25
center = [0.5, 0.0]
offset = 0.0"#),
        ("wrapped_exp3", r#"[algorithm]
arms = 2
[adversary]
kind = "fixed_losses"
losses = [0.0, 1.0]"#),
        ("wrapped_fkm", r#"[algorithm.body]
shape = "box"
dim = 1
half_width = 1.0
[adversary]
kind = "linear"
grad = [0.3]
offset = 0.5"#),
        ("zero_sum_game", r#"[algorithm]
auto_clamp = true
[game]
kind = "matching_pennies""#),
        ("zero_sum_game", r#"[game]
kind = "quadratic_saddle"
offset = 0.5
alpha = 0.1
beta = 0.1
lin_y = [0.05]
lin_z = [0.0]
coupling = [[0.1]]
y_body = { shape = "ball", dim = 1, radius = 1.0 }
z_body = { shape = "ball", dim = 1, radius = 1.0 }"#),
        ("finite_game_cce", r#"[algorithm]
auto_clamp = true
[game]
kind = "chicken""#),
        ("proposition1", ""),
        ("proposition2", r#"[algorithm]
arms = 2
auto_clamp = true"#),
    ];
    for (i, (kind, body)) in cases.iter().enumerate() {
        let out = tmp.path().join(i.to_string());
        let text = format!(
            "kind = \"{kind}\"\nhorizon = 2048\noutput = \"{}\"\nthin = true\n[seeds]\ncount = 2\nroot = 1\n[delay]\nkind = \"power_law\"\nalpha = 0.25\n{body}",
            out.display()
        );
        let cfg = RunConfig::from_toml(&text).unwrap_or_else(|e| panic!("case {i}: {e}"));
        let (report, dir) = run_experiment(&cfg).unwrap_or_else(|e| panic!("case {i}: {e}"));
        assert!(dir.join("summary.csv").exists(), "case {i}");
        assert_eq!(report.gaps.is_empty(), !kind.contains("game"), "case {i}");
        assert_eq!(report.seeds.len(), 2);
    }
}

#[test]
fn sweep_writes_one_directory_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("cfg.toml");
    fs::write(&path, exp3_config(&tmp.path().join("out"))).unwrap();
    let values = vec!["1".to_string(), "8".to_string()];
    // the base schedule is a power law, which has no `delay` field
    let err = sweep(&path, "delay.delay", &values).unwrap_err();
    assert!(err.to_string().contains("delay"), "{err}");
    let text = exp3_config(&tmp.path().join("out")).replace("kind = \"power_law\"\nalpha = 0.5", "kind = \"constant\"\ndelay = 1");
    fs::write(&path, text).unwrap();
    let reports = sweep(&path, "delay.delay", &values).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(tmp.path().join("out/delay.delay=8/summary.csv").exists());
    assert!(reports[1].1.summary.last().unwrap().missing >= reports[0].1.summary.last().unwrap().missing);
}
