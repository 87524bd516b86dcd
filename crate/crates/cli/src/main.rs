use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lagbandit::experiment::acceptance::{run_suite_with, Tier};
use lagbandit::experiment::{run_experiment, sweep, Report, RunConfig};
use lagbandit::Error;

/// Delayed-feedback bandit experiments. Worker threads: LAGBANDIT_WORKERS.
#[derive(Parser)]
#[command(name = "lagbandit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its artifact directory.
    Run { config: PathBuf },
    /// Run the acceptance suite, one line per criterion.
    Accept {
        #[arg(long, default_value = "fast")]
        tier: String,
        /// Break the EXP3 long-delay filter in the stress runs.
        #[arg(long, hide = true)]
        sabotage_filter: bool,
    },
    /// Re-run a configuration once per value of one parameter.
    Sweep {
        config: PathBuf,
        /// Dotted key, e.g. `delay.delay` or `algorithm.eta`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
}

fn print_report(report: &Report) {
    println!("{:>10} {:>14} {:>10} {:>14}", "t", "mean_regret", "std_err", "bound");
    for row in &report.summary {
        let bound = row.bound.map_or("-".to_string(), |b| format!("{b:.2}"));
        println!("{:>10} {:>14.3} {:>10.3} {:>14}", row.t, row.mean_regret, row.std_err, bound);
    }
    if let Some(g) = report.gaps.last() {
        println!("equilibrium gap at T: {:.4} +- {:.4}", g.gap, g.gap_std_err);
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_user_error() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn load(path: &Path) -> Result<RunConfig, ExitCode> {
    RunConfig::load(path).map_err(|e| {
        eprintln!("error: cannot load {}: {e}", path.display());
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match run_experiment(&cfg) {
                Ok((report, dir)) => {
                    print_report(&report);
                    println!("wrote {}", dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Accept { tier, sabotage_filter } => {
            let tier: Tier = match tier.parse() {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            match run_suite_with(tier, sabotage_filter, |r| println!("{r}")) {
                Ok(results) if results.iter().all(|r| r.passed) => ExitCode::SUCCESS,
                Ok(_) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Sweep { config, param, values } => {
            if let Err(code) = load(&config) {
                return code;
            }
            match sweep(&config, &param, &values) {
                Ok(reports) => {
                    for (value, report) in reports {
                        println!("{param} = {value}");
                        print_report(&report);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
