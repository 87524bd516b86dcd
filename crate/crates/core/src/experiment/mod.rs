//! Seeded batch experiments: configuration, execution, CSV artifacts and
//! the acceptance suite.

pub mod acceptance;
pub mod artifacts;
pub mod config;
pub mod runner;

pub use config::{resolve, AdversarySpec, AlgorithmSpec, ExperimentKind, GameSpec, Resolved, RunConfig, Seeds, Tuning};
pub use runner::{execute, run_experiment, sweep, GapRow, Report, SeedRecord, SummaryRow};

use crate::error::{Error, Result};

/// Environment variable holding the worker-pool size.
pub const WORKERS_ENV: &str = "LAGBANDIT_WORKERS";

/// Thread pool sized by [`WORKERS_ENV`], or by rayon's default when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(e.to_string()))
}

/// Least-squares slope of `ln(regret)` against `ln(T)`.
pub fn fit_regret_exponent(points: &[(u64, f64)]) -> Result<f64> {
    Ok(fit_with_error(points, None)?.0)
}

/// Slope and, when per-point standard errors are given, its standard
/// error by the delta method (`sd(ln R) ~ se / R`, points independent).
pub fn fit_with_error(points: &[(u64, f64)], std_errs: Option<&[f64]>) -> Result<(f64, f64)> {
    if points.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 checkpoints, got {}", points.len())));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Fit("checkpoints must be strictly increasing".into()));
    }
    if let Some(&(t, r)) = points.iter().find(|p| p.1.is_nan() || p.1 <= 0.0) {
        return Err(Error::Fit(format!("regret {r} at T = {t} is not positive")));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    let se = std_errs.map_or(0.0, |se| {
        xs.iter()
            .zip(se)
            .zip(points)
            .map(|((x, s), p)| ((x - mx) / sxx * s / p.1).powi(2))
            .sum::<f64>()
            .sqrt()
    });
    Ok((slope, se))
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
