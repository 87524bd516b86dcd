//! Prints one line per acceptance criterion. Tier from `LAGBANDIT_TIER`
//! (`fast` or `full`, default `full`).

use std::process::ExitCode;

use lagbandit::experiment::acceptance::{run_suite_with, Tier};

fn main() -> ExitCode {
    let tier: Tier = match std::env::var("LAGBANDIT_TIER").as_deref().unwrap_or("full").parse() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let started = std::time::Instant::now();
    let results = match run_suite_with(tier, false, |r| println!("{r}")) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("acceptance suite aborted: {e}");
            return ExitCode::from(2);
        }
    };
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    let unexpected: Vec<_> = failed.iter().filter(|r| !r.known_gap()).collect();
    println!(
        "acceptance ({tier:?}): {} passed, {} failed ({} known), {:.0}s",
        results.len() - failed.len(),
        failed.len(),
        failed.len() - unexpected.len(),
        started.elapsed().as_secs_f64()
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
