//! CSV and manifest files of a run directory. Every CSV starts with a
//! `# schema=<name> v<version>` comment line followed by a header row.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::config::RunConfig;
use crate::experiment::runner::Report;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub schema: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut file = fs::File::create(dir.join(&self.file))?;
        writeln!(file, "# schema={}", self.schema)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn summary_table(report: &Report) -> Table {
    Table {
        file: "summary.csv".into(),
        schema: "lagbandit-summary v1",
        header: [
            "t",
            "mean_regret",
            "std_err",
            "mean_expected_regret",
            "bound",
            "discounted_ratio",
            "missing",
            "received_delay_sum",
            "discarded",
        ]
        .map(String::from)
        .to_vec(),
        rows: report
            .summary
            .iter()
            .map(|r| {
                vec![
                    r.t.to_string(),
                    r.mean_regret.to_string(),
                    r.std_err.to_string(),
                    opt(r.mean_expected_regret),
                    opt(r.bound),
                    r.discounted_ratio.to_string(),
                    r.missing.to_string(),
                    r.received_delay_sum.to_string(),
                    r.discarded.to_string(),
                ]
            })
            .collect(),
    }
}

pub fn gap_table(report: &Report) -> Table {
    Table {
        file: "gaps.csv".into(),
        schema: "lagbandit-gaps v1",
        header: ["t", "gap", "gap_std_err", "gap_mixed", "value", "max_discounted_ratio", "max_discounted_ratio_std_err"]
            .map(String::from)
            .to_vec(),
        rows: report
            .gaps
            .iter()
            .map(|g| {
                vec![
                    g.t.to_string(),
                    g.gap.to_string(),
                    g.gap_std_err.to_string(),
                    opt(g.gap_mixed),
                    opt(g.value),
                    opt(g.max_ratio),
                    opt(g.max_ratio_std_err),
                ]
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realized {
    /// `sum_t min(d_t, T - t + 1)`
    pub effective_delay_sum: u64,
    pub missing: u64,
    pub received_delay_sum: u64,
    /// Samples dropped by the long-delay rule, first replicate.
    pub discarded: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub index: u64,
    pub seed: u64,
    pub regret: f64,
    pub missing: u64,
    pub discarded: u64,
    pub restarts: u32,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperEpochEntry {
    pub nu: u32,
    pub kind: crate::doubling::SuperEpochKind,
    pub first_round: u64,
    pub last_round: u64,
    /// `(w, h)` the learner was tuned for.
    pub tuned_w: u32,
    pub tuned_h: u32,
    pub missing_sum: u64,
}

/// `manifest.toml`: the resolved configuration plus realised quantities.
/// Wall time goes to `timing.toml` so the manifest is reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub config: RunConfig,
    pub realized: Realized,
    #[serde(default)]
    pub seeds: Vec<SeedEntry>,
    #[serde(default)]
    pub super_epochs: Vec<SuperEpochEntry>,
}

impl Manifest {
    pub fn from_report(report: &Report) -> Self {
        let last = report.summary.last();
        Manifest {
            schema: "lagbandit-manifest v1".into(),
            config: report.resolved.config.clone(),
            realized: Realized {
                effective_delay_sum: report.effective_delay_sum,
                missing: last.map_or(0, |r| r.missing),
                received_delay_sum: last.map_or(0, |r| r.received_delay_sum),
                discarded: report.seeds.first().map_or(0, |s| s.discarded),
                exponent: report.exponent,
            },
            seeds: report
                .seeds
                .iter()
                .map(|s| SeedEntry {
                    index: s.index,
                    seed: s.seed,
                    regret: s.regret,
                    missing: s.missing,
                    discarded: s.discarded,
                    restarts: s.restarts,
                    violations: s.violations,
                })
                .collect(),
            super_epochs: report
                .super_epochs
                .iter()
                .map(|e| SuperEpochEntry {
                    nu: e.nu,
                    kind: e.epoch.kind,
                    first_round: e.first_round,
                    last_round: e.last_round,
                    tuned_w: e.tuned.0,
                    tuned_h: e.tuned.1,
                    missing_sum: e.missing_sum,
                })
                .collect(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn write_all(report: &Report, dir: &Path, wall_seconds: f64) -> Result<()> {
    fs::create_dir_all(dir)?;
    summary_table(report).write(dir)?;
    if !report.gaps.is_empty() {
        gap_table(report).write(dir)?;
    }
    for t in &report.trajectories {
        t.write(dir)?;
    }
    fs::write(dir.join("manifest.toml"), Manifest::from_report(report).to_toml()?)?;
    fs::write(dir.join("timing.toml"), format!("wall_seconds = {wall_seconds}\n"))?;
    Ok(())
}
