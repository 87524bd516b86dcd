//! The acceptance suite: one pass/fail result per criterion, with every
//! tolerance fixed here.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;

use crate::body::ConvexBody;
use crate::cost::{Adversary, ArmComparator, ArmLosses, ConvexComparator, ConvexLoss};
use crate::delay::{effective_delay_sum, missing_set, DelaySchedule};
use crate::doubling::{wrapped_exp3, wrapped_fkm, EpochRecord, RegretShape, SuperEpoch};
use crate::error::{Error, Result};
use crate::exp3::{Exp3, GammaMode};
use crate::experiment::config::{resolve, AdversarySpec, AlgorithmSpec, ExperimentKind, GameSpec, RunConfig, Seeds};
use crate::experiment::runner::{execute, Report};
use crate::experiment::fit_with_error;
use crate::fkm::{gradient_estimate, sample_unit_sphere};
use crate::game::{discounted_ergodic_average, discounted_ergodic_distribution, discounted_ergodic_mixture};
use crate::queue::{DeliveryQueue, FeedbackEvent};
use crate::rng::{substream, Stream};
use crate::sim::{run, RunOptions};
use crate::step::{exp3_eta_cap, StepSchedule};

const ROOT_SEED: u64 = 20_240_917;

/// Criteria whose thresholds the implementation cannot meet; see the README.
pub const KNOWN_GAPS: &[u32] = &[2, 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    /// 10 seeds and every other horizon in the rate fits.
    Fast,
    /// 30 seeds, full grids.
    Full,
}

impl FromStr for Tier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Tier::Fast),
            "full" => Ok(Tier::Full),
            other => Err(Error::Config(format!("unknown tier {other:?}; expected fast or full"))),
        }
    }
}

impl Tier {
    fn seeds(self) -> u64 {
        match self {
            Tier::Fast => 10,
            Tier::Full => 30,
        }
    }

    fn horizons(self, lo: u32, hi: u32) -> Vec<u64> {
        let step = if self == Tier::Fast { 2 } else { 1 };
        (lo..=hi).step_by(step).map(|e| 1u64 << e).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub threshold: String,
    pub notes: String,
}

impl CriterionResult {
    pub fn known_gap(&self) -> bool {
        KNOWN_GAPS.contains(&self.id)
    }
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.passed, self.known_gap()) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        write!(f, "[{status}] {:>2} {}: {} (threshold {})", self.id, self.name, self.measured, self.threshold)?;
        if !self.notes.is_empty() {
            write!(f, "; {}", self.notes)?;
        }
        Ok(())
    }
}

fn config(kind: ExperimentKind, horizon: u64, seeds: u64, delay: DelaySchedule) -> RunConfig {
    RunConfig {
        kind,
        horizon,
        seeds: Seeds { count: seeds, root: ROOT_SEED },
        delay,
        column_delay: None,
        algorithm: AlgorithmSpec::default(),
        adversary: None,
        game: None,
        checkpoints: Vec::new(),
        trajectories: false,
        thin: false,
        output: PathBuf::new(),
    }
}

/// Arm 0 costs nothing, every other arm costs 1.
fn gap_losses(arms: usize) -> AdversarySpec {
    AdversarySpec::FixedLosses { losses: (0..arms).map(|i| if i == 0 { 0.0 } else { 1.0 }).collect() }
}

fn quadratic_loss() -> AdversarySpec {
    AdversarySpec::Quadratic { scale: 0.25, center: vec![0.5, 0.0], offset: 0.0 }
}

fn delay_label(d: &DelaySchedule) -> String {
    match d {
        DelaySchedule::Constant { delay } => format!("d={delay}"),
        DelaySchedule::PowerLaw { alpha } => format!("d=t^{alpha}"),
        DelaySchedule::Linear => "d=t".into(),
        other => format!("{other:?}"),
    }
}

/// Tallies stability checks over every EXP3 run of the suite.
#[derive(Debug, Default)]
struct Stability {
    runs: u64,
    violations: u64,
    max_ratio: f64,
}

impl Stability {
    fn add(&mut self, report: &Report) {
        for s in &report.seeds {
            self.runs += 1;
            self.violations += s.violations;
            self.max_ratio = self.max_ratio.max(s.max_ratio);
        }
    }
}

fn last_row(report: &Report) -> &crate::experiment::SummaryRow {
    report.summary.last().expect("horizon row")
}

fn exp3_ceiling(tier: Tier, stab: &mut Stability) -> Result<CriterionResult> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (k, e) in [(5usize, 14u32), (10, 16)] {
        for delay in [DelaySchedule::Constant { delay: 1 }, DelaySchedule::Constant { delay: k as u64 }, DelaySchedule::PowerLaw { alpha: 0.75 }] {
            let mut c = config(ExperimentKind::SingleAgentExp3, 1 << e, tier.seeds(), delay.clone());
            c.adversary = Some(gap_losses(k));
            let report = execute(&resolve(&c)?)?;
            stab.add(&report);
            let row = last_row(&report);
            let bound = row.bound.expect("fixed step size has a bound");
            passed &= row.mean_regret <= bound;
            parts.push(format!("K={k} {}: {:.0} <= {:.0}", delay_label(&delay), row.mean_regret, bound));
        }
    }
    Ok(CriterionResult {
        id: 1,
        name: "EXP3 regret below the known-parameter bound",
        passed,
        measured: parts.join(", "),
        threshold: "mean regret <= bound on realised |M|, |D|, kept delay sum".into(),
        notes: String::new(),
    })
}

/// Fit over separate runs, one per horizon, and test the band with 3 sigma.
fn rate_fit(
    horizons: &[u64],
    make: impl Fn(u64) -> RunConfig,
    stab: Option<&mut Stability>,
) -> Result<(f64, f64)> {
    let mut points = Vec::new();
    let mut errs = Vec::new();
    let mut reports = Vec::new();
    for &t in horizons {
        let mut c = make(t);
        c.checkpoints = vec![t];
        let report = execute(&resolve(&c)?)?;
        let row = last_row(&report);
        points.push((t, row.mean_regret));
        errs.push(row.std_err);
        reports.push(report);
    }
    if let Some(stab) = stab {
        reports.iter().for_each(|r| stab.add(r));
    }
    fit_with_error(&points, Some(&errs))
}

fn in_band(slope: f64, se: f64, lo: f64, hi: f64) -> bool {
    slope + 3.0 * se >= lo && slope - 3.0 * se <= hi
}

fn exp3_rate(tier: Tier, stab: &mut Stability) -> Result<CriterionResult> {
    let horizons = tier.horizons(10, 17);
    let arms = 2;
    let mut passed = true;
    let mut parts = Vec::new();
    for delay in [DelaySchedule::Constant { delay: 1 }, DelaySchedule::Constant { delay: arms as u64 }] {
        let (slope, se) = rate_fit(
            &horizons,
            |t| {
                let mut c = config(ExperimentKind::SingleAgentExp3, t, tier.seeds(), delay.clone());
                c.adversary = Some(gap_losses(arms));
                c
            },
            Some(&mut *stab),
        )?;
        passed &= in_band(slope, se, 0.40, 0.60);
        parts.push(format!("{}: {slope:.3} +- {se:.3}", delay_label(&delay)));
    }
    Ok(CriterionResult {
        id: 2,
        name: "EXP3 regret exponent",
        passed,
        measured: parts.join(", "),
        threshold: "[0.40, 0.60] within 3 sigma".into(),
        notes: format!("K={arms}, T = 2^10..2^17; small-T points sit in the transient before 1/eta << T"),
    })
}

fn fkm_config(t: u64, seeds: u64, delay: DelaySchedule) -> Result<RunConfig> {
    let mut c = config(ExperimentKind::SingleAgentFkm, t, seeds, delay);
    c.algorithm.body = Some(ConvexBody::ball(2, 1.0)?);
    c.adversary = Some(quadratic_loss());
    Ok(c)
}

fn fkm_ceiling(tier: Tier) -> Result<CriterionResult> {
    let mut passed = true;
    let mut parts = Vec::new();
    for delay in [DelaySchedule::Constant { delay: 1 }, DelaySchedule::PowerLaw { alpha: 0.25 }] {
        let report = execute(&resolve(&fkm_config(1 << 14, tier.seeds(), delay.clone())?)?)?;
        let row = last_row(&report);
        let bound = row.bound.expect("fixed step size has a bound");
        passed &= row.mean_regret <= bound;
        parts.push(format!("{}: {:.1} <= {:.0}", delay_label(&delay), row.mean_regret, bound));
    }
    Ok(CriterionResult {
        id: 3,
        name: "FKM regret below the known-parameter bound",
        passed,
        measured: parts.join(", "),
        threshold: "mean regret <= bound".into(),
        notes: "n=2, unit ball, l(x) = |x - (0.5, 0)|^2 / 4, T = 2^14".into(),
    })
}

fn fkm_rate(tier: Tier) -> Result<CriterionResult> {
    let horizons = tier.horizons(10, 16);
    let mut passed = true;
    let mut parts = Vec::new();
    for delay in [DelaySchedule::Constant { delay: 1 }, DelaySchedule::PowerLaw { alpha: 0.25 }] {
        let c0 = fkm_config(1, tier.seeds(), delay.clone())?;
        let (slope, se) = rate_fit(
            &horizons,
            |t| {
                let mut c = c0.clone();
                c.horizon = t;
                c
            },
            None,
        )?;
        passed &= in_band(slope, se, 0.60, 0.90);
        parts.push(format!("{}: {slope:.3} +- {se:.3}", delay_label(&delay)));
    }
    Ok(CriterionResult {
        id: 4,
        name: "FKM regret exponent",
        passed,
        measured: parts.join(", "),
        threshold: "[0.60, 0.90] within 3 sigma".into(),
        notes: String::new(),
    })
}

fn smooth_test_loss(x: &[f64]) -> f64 {
    0.25 * (x[0] * x[0] + x[1] * x[1]) + 0.25
}

/// `E_{v in unit disk} f(x + delta v)` by polar quadrature: midpoint in the
/// radius, uniform (spectrally accurate) in the angle.
fn disk_average(f: impl Fn(&[f64]) -> f64, x: &[f64], delta: f64, nr: usize, ntheta: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..nr {
        let r = (i as f64 + 0.5) / nr as f64;
        let mut ring = 0.0;
        for j in 0..ntheta {
            let th = 2.0 * std::f64::consts::PI * j as f64 / ntheta as f64;
            ring += f(&[x[0] + delta * r * th.cos(), x[1] + delta * r * th.sin()]);
        }
        acc += ring / ntheta as f64 * 2.0 * r / nr as f64;
    }
    acc
}

fn smoothed_gradient(x: &[f64], delta: f64, nr: usize, ntheta: usize) -> [f64; 2] {
    let h = 1e-3;
    let mut g = [0.0; 2];
    for (i, gi) in g.iter_mut().enumerate() {
        let (mut up, mut down) = (x.to_vec(), x.to_vec());
        up[i] += h;
        down[i] -= h;
        *gi = (disk_average(smooth_test_loss, &up, delta, nr, ntheta)
            - disk_average(smooth_test_loss, &down, delta, nr, ntheta))
            / (2.0 * h);
    }
    g
}

fn estimator_bias() -> Result<CriterionResult> {
    let x = [0.2, -0.1];
    let delta = 0.1;
    let draws = 1_000_000usize;
    let mut rng = substream(ROOT_SEED, Stream::Learner);
    let mut sum = [0.0; 2];
    let mut sq = [0.0; 2];
    for _ in 0..draws {
        let u = sample_unit_sphere(2, &mut rng);
        let y = [x[0] + delta * u[0], x[1] + delta * u[1]];
        let g = gradient_estimate(smooth_test_loss(&y), &u, delta)?;
        for i in 0..2 {
            sum[i] += g[i];
            sq[i] += g[i] * g[i];
        }
    }
    let fine = smoothed_gradient(&x, delta, 400, 256);
    let coarse = smoothed_gradient(&x, delta, 200, 128);
    let mut passed = true;
    let mut parts = Vec::new();
    for i in 0..2 {
        let n = draws as f64;
        let mean = sum[i] / n;
        let var = (sq[i] / n - mean * mean) * n / (n - 1.0);
        let se_mc = (var / n).sqrt();
        let se_oracle = (fine[i] - coarse[i]).abs();
        let combined = (se_mc * se_mc + se_oracle * se_oracle).sqrt();
        let z = (mean - fine[i]).abs() / combined;
        passed &= z <= 4.0;
        parts.push(format!("g{i} = {mean:.4} vs {:.4} ({z:.2} SE)", fine[i]));
    }
    Ok(CriterionResult {
        id: 5,
        name: "one-point gradient estimate is unbiased for the smoothed loss",
        passed,
        measured: parts.join(", "),
        threshold: "within 4 combined standard errors".into(),
        notes: format!("l(x) = |x|^2 / 4 + 1/4, x = (0.2, -0.1), delta={delta}, {draws} draws"),
    })
}

/// Step size at the stability cap: every delay-1 sample is applied, which is
/// the tightest case the ratio bound has to cover; delay 100 samples must
/// all be dropped unless the filter is sabotaged.
fn stability_stress(seeds: u64, sabotage: bool, stab: &mut Stability) -> Result<()> {
    let arms = 10;
    let t = 4096;
    for delay in [1u64, 100] {
        for i in 0..seeds {
            let mut learner = Exp3::new(arms, StepSchedule::fixed(exp3_eta_cap()), GammaMode::Zero)?;
            if sabotage {
                learner = learner.sabotage_filter(1e-3);
            }
            let losses: Vec<f64> = (0..arms).map(|a| if a == 0 { 0.0 } else { 1.0 }).collect();
            let mut adversary: Adversary<usize, ArmLosses> = Adversary::Oblivious(Box::new(move |_| ArmLosses(losses.clone())));
            let mut rng = substream(ROOT_SEED + i, Stream::Learner);
            let out = run(&mut learner, &mut adversary, ArmComparator::new(arms), &vec![delay; t], t as u64, &RunOptions::default(), &mut rng)?;
            stab.runs += 1;
            stab.violations += out.violations;
            stab.max_ratio = stab.max_ratio.max(out.max_ratio);
        }
    }
    Ok(())
}

fn stability_result(stab: &Stability, sabotage: bool) -> CriterionResult {
    CriterionResult {
        id: 6,
        name: "multiplicative stability of EXP3 under delays",
        passed: stab.violations == 0,
        measured: format!("{} violations over {} runs, largest ratio {:.4}", stab.violations, stab.runs, stab.max_ratio),
        threshold: format!("0 violations of p_before / p_origin <= e^2 = {:.4}", std::f64::consts::E.powi(2)),
        notes: if sabotage { "long-delay filter sabotaged".into() } else { String::new() },
    }
}

/// The stability criterion over the stress runs alone.
pub fn stability_stress_only(seeds: u64, sabotage: bool) -> Result<CriterionResult> {
    let mut stab = Stability::default();
    stability_stress(seeds, sabotage, &mut stab)?;
    Ok(stability_result(&stab, sabotage))
}

/// `m_t` from the delays alone: samples of rounds `first..=t` still in flight.
fn missing_in_flight(delays: &[u64], first: u64, t: u64) -> u64 {
    (first..=t).filter(|&s| s + delays[s as usize - 1] > t).count() as u64
}

struct LayoutCheck {
    cap_ok: bool,
    sums_agree: bool,
    worst_slack: i64,
}

/// `restarts` separates finished super-epochs from the running one; a
/// restart on the last round leaves no running record.
fn check_layout(records: &[EpochRecord], delays: &[u64], restarts: u32) -> LayoutCheck {
    let mut out = LayoutCheck { cap_ok: true, sums_agree: true, worst_slack: i64::MAX };
    for r in records {
        // the round that crossed an index boundary belongs to the next
        // super-epoch's accounting
        let closed = r.nu < restarts;
        let end = if closed { r.last_round - 1 } else { r.last_round };
        let sum: u64 = (r.first_round..=end).map(|t| missing_in_flight(delays, r.first_round, t)).sum();
        let recorded = if closed { r.missing_sum - r.last_m } else { r.missing_sum };
        out.sums_agree &= sum == recorded;
        if let Some(cap) = r.missing_cap() {
            out.cap_ok &= sum <= cap;
            out.worst_slack = out.worst_slack.min(cap as i64 - sum as i64);
        }
    }
    out
}

fn doubling_invariants() -> Result<CriterionResult> {
    let horizon = 1u64 << 14;
    let (mut caps, mut sums, mut w_ok, mut h_ok, mut h_advisory) = (true, true, true, true, true);
    let (mut max_w_excess, mut max_h, mut worst_slack) = (f64::NEG_INFINITY, 0, i64::MAX);
    let mut layouts = 0;
    for i in 0..20u64 {
        let delays = DelaySchedule::RandomBounded { max: 1 << (i % 15), seed: 100 + i }.realize(horizon)?;
        let d = effective_delay_sum(&delays, horizon) as f64;
        let mut rng = substream(ROOT_SEED + i, Stream::Learner);
        let mut exp3 = wrapped_exp3(2, GammaMode::Zero, ROOT_SEED + i)?;
        let mut arms: Adversary<usize, ArmLosses> = Adversary::Oblivious(Box::new(|_| ArmLosses(vec![0.0, 1.0])));
        run(&mut exp3, &mut arms, ArmComparator::new(2), &delays, horizon, &RunOptions::default(), &mut rng)?;
        let body = ConvexBody::ball(1, 1.0)?;
        let mut fkm = wrapped_fkm(body.clone(), 0.5, 0.5, ROOT_SEED + i)?;
        let loss = ConvexLoss::Quadratic { scale: 0.25, center: vec![0.0], offset: 0.0 };
        let mut convex: Adversary<Vec<f64>, ConvexLoss> = Adversary::Oblivious(Box::new(move |_| loss.clone()));
        run(&mut fkm, &mut convex, ConvexComparator::new(body), &delays, horizon, &RunOptions::default(), &mut rng)?;

        for (records, idx, restarts) in [
            (exp3.epoch_records(), exp3.indices().clone(), exp3.restarts()),
            (fkm.epoch_records(), fkm.indices().clone(), fkm.restarts()),
        ] {
            layouts += 1;
            let check = check_layout(&records, &delays, restarts);
            caps &= check.cap_ok;
            sums &= check.sums_agree;
            worst_slack = worst_slack.min(check.worst_slack);
            let w_excess = idx.w as f64 - (d.log2() + 1.0);
            max_w_excess = max_w_excess.max(w_excess);
            w_ok &= w_excess <= 1e-12;
            h_ok &= idx.h as f64 <= ((horizon + 2) as f64).log2() - 1.0;
            h_advisory &= idx.h as u64 <= horizon.ilog2() as u64 + 1;
            max_h = max_h.max(idx.h);
        }
    }
    Ok(CriterionResult {
        id: 7,
        name: "doubling-trick index invariants",
        passed: caps && sums && w_ok && h_ok,
        measured: format!(
            "per-super-epoch caps {}, smallest slack {worst_slack}; missing sums match delays {}; W - (log2 D + 1) <= {max_w_excess:.2}; max H = {max_h}",
            if caps { "hold" } else { "violated" },
            if sums { "yes" } else { "no" },
        ),
        threshold: format!("sum m_t <= cap, W <= log2 D + 1, H <= log2(T+2) - 1 = {:.2}", ((horizon + 2) as f64).log2() - 1.0),
        notes: format!(
            "{layouts} layouts (EXP3 and FKM shapes, 20 schedules, T = 2^14); the update rule forces H = floor(log2 T) + 1 at t = T, {} for H <= floor(log2 T) + 1",
            if h_advisory { "holds" } else { "fails" }
        ),
    })
}

fn agnostic_vs_known(tier: Tier, stab: &mut Stability) -> Result<CriterionResult> {
    let mut passed = true;
    let mut parts = Vec::new();
    for delay in [DelaySchedule::Constant { delay: 5 }, DelaySchedule::PowerLaw { alpha: 0.75 }] {
        let mut known = config(ExperimentKind::SingleAgentExp3, 1 << 16, tier.seeds(), delay.clone());
        known.adversary = Some(gap_losses(5));
        known.checkpoints = vec![1 << 16];
        let known = execute(&resolve(&known)?)?;
        stab.add(&known);
        let bound = last_row(&known).bound.expect("fixed step size has a bound");

        let mut wrapped = config(ExperimentKind::WrappedExp3, 1 << 16, tier.seeds(), delay.clone());
        wrapped.algorithm.arms = Some(5);
        wrapped.adversary = Some(gap_losses(5));
        wrapped.checkpoints = vec![1 << 16];
        let wrapped = execute(&resolve(&wrapped)?)?;
        stab.add(&wrapped);
        let regret = last_row(&wrapped).mean_regret;
        passed &= regret <= 4.0 * bound;
        parts.push(format!("{}: {regret:.0} vs 4 x {bound:.0}", delay_label(&delay)));
    }
    Ok(CriterionResult {
        id: 8,
        name: "doubling-wrapped EXP3 within 4x of the tuned bound",
        passed,
        measured: parts.join(", "),
        threshold: "wrapped mean regret <= 4 x known-(T, D) bound".into(),
        notes: "K=5, T=2^16".into(),
    })
}

fn game_config(kind: ExperimentKind, game: GameSpec, horizon: u64, seeds: u64, delay: DelaySchedule) -> RunConfig {
    let mut c = config(kind, horizon, seeds, delay);
    c.game = Some(game);
    c.algorithm.auto_clamp = true;
    c
}

fn zero_sum_convergence(tier: Tier, stab: &mut Stability) -> Result<CriterionResult> {
    let c = game_config(ExperimentKind::ZeroSumGame, GameSpec::MatchingPennies, 100_000, tier.seeds(), DelaySchedule::PowerLaw { alpha: 0.25 });
    let report = execute(&resolve(&c)?)?;
    stab.add(&report);
    let row = report.gaps.last().expect("horizon row");
    let value = row.value.expect("zero-sum games report a value");
    Ok(CriterionResult {
        id: 9,
        name: "zero-sum play approaches Nash equilibrium",
        passed: row.gap <= 0.1 && (value - 0.5).abs() <= 0.05,
        measured: format!("ne gap {:.4} +- {:.4}, value {value:.4}", row.gap, row.gap_std_err),
        threshold: "ne gap <= 0.1 and |value - 0.5| <= 0.05".into(),
        notes: format!(
            "matching pennies, d = ceil(t^1/4), T = 10^5; gap of mixed-strategy averages {:.4}",
            row.gap_mixed.unwrap_or(f64::NAN)
        ),
    })
}

fn linear_regret(tier: Tier, stab: &mut Stability) -> Result<(CriterionResult, CriterionResult)> {
    let horizon = 1u64 << 16;
    let arms = 2;
    let mut c = config(ExperimentKind::Proposition2, horizon, tier.seeds(), DelaySchedule::Linear);
    c.algorithm.arms = Some(arms);
    c.algorithm.auto_clamp = true;
    c.checkpoints = vec![horizon];
    let report = execute(&resolve(&c)?)?;
    stab.add(&report);
    let ratio = last_row(&report).mean_regret / horizon as f64;
    let target = 0.3 * (1.0 - 1.0 / arms as f64);
    let a = CriterionResult {
        id: 10,
        name: "(a) linear regret under d = t",
        passed: ratio >= target,
        measured: format!("regret / T = {ratio:.4}, discounted ratio {:.4}", last_row(&report).discounted_ratio),
        threshold: format!(">= {target:.2}"),
        notes: "K=2, T=2^16, eta_t = 1/(t ln(t+1))".into(),
    };

    let mut g = game_config(ExperimentKind::ZeroSumGame, GameSpec::MatchingPennies, horizon, tier.seeds(), DelaySchedule::Linear);
    g.checkpoints = vec![1 << 12, 1 << 14];
    let report = execute(&resolve(&g)?)?;
    stab.add(&report);
    let gaps: Vec<f64> = report.gaps.iter().map(|r| r.gap).collect();
    let b = CriterionResult {
        id: 10,
        name: "(b) ne gap still shrinks under d = t",
        passed: gaps.windows(2).all(|w| w[1] < w[0]),
        measured: format!("ne gap at 2^12, 2^14, 2^16: {}", gaps.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>().join(", ")),
        threshold: "strictly decreasing".into(),
        notes: String::new(),
    };
    Ok((a, b))
}

fn cce_emergence(tier: Tier, stab: &mut Stability) -> Result<CriterionResult> {
    let c = game_config(ExperimentKind::FiniteGameCce, GameSpec::Chicken, 100_000, tier.seeds(), DelaySchedule::PowerLaw { alpha: 0.25 });
    let report = execute(&resolve(&c)?)?;
    stab.add(&report);
    let last = report.gaps.last().expect("horizon row");
    let mut dominated = true;
    let mut worst = f64::NEG_INFINITY;
    for row in &report.gaps {
        let ratio = row.max_ratio.expect("finite games report regret ratios");
        let se = (row.gap_std_err.powi(2) + row.max_ratio_std_err.unwrap_or(0.0).powi(2)).sqrt();
        worst = worst.max(row.gap - ratio - 3.0 * se);
        dominated &= row.gap <= ratio + 3.0 * se;
    }
    Ok(CriterionResult {
        id: 11,
        name: "general-sum play approaches the coarse correlated equilibria",
        passed: last.gap <= 0.1 && dominated,
        measured: format!(
            "cce gap {:.4} at T = 10^5; max over checkpoints of gap - ratio - 3 sigma = {worst:.4}",
            last.gap
        ),
        threshold: "cce gap <= 0.1 and gap <= max discounted-regret ratio + 3 sigma everywhere".into(),
        notes: format!("chicken, d = ceil(t^1/4); gap of mixed-strategy averages {:.4}", last.gap_mixed.unwrap_or(f64::NAN)),
    })
}

fn random_schedule(rng: &mut impl Rng, horizon: u64) -> DelaySchedule {
    match rng.random_range(0..5) {
        0 => DelaySchedule::Constant { delay: rng.random_range(1..=20) },
        1 => DelaySchedule::RandomBounded { max: rng.random_range(1..=64), seed: rng.random() },
        2 => DelaySchedule::PowerLaw { alpha: rng.random_range(0.0..1.2) },
        3 => DelaySchedule::Linear,
        _ => DelaySchedule::ExplicitList { delays: (0..horizon).map(|_| rng.random_range(1..=horizon)).collect() },
    }
}

/// Replays the wrapper's index bookkeeping by rescanning the delays.
fn naive_indices(delays: &[u64], horizon: u64, shape: &RegretShape) -> Vec<(u32, u32, u32, u64, u64, bool)> {
    let (mut w, mut h, mut nu, mut cumsum, mut start) = (0u32, 0u32, 0u32, 0u64, 1u64);
    let mut epoch = SuperEpoch::containing(0, 0, shape);
    let mut out = Vec::new();
    for t in 1..=horizon {
        let m = missing_in_flight(delays, start, t);
        cumsum += m;
        while 1u64 << w <= cumsum {
            w += 1;
        }
        while 1u64 << h <= t {
            h += 1;
        }
        let restarted = !epoch.contains(w, h, shape);
        if restarted {
            nu += 1;
            epoch = SuperEpoch::containing(w, h, shape);
            start = t + 1;
        }
        out.push((w, h, nu, m, cumsum, restarted));
    }
    out
}

/// `x_t = x_{t-1} + (eta_t / sum_{s<=t} eta_s)(v_t - x_{t-1})`.
fn running_average(values: &[Vec<f64>], etas: &[f64]) -> Vec<f64> {
    let mut avg = vec![0.0; values[0].len()];
    let mut total = 0.0;
    for (v, &e) in values.iter().zip(etas) {
        total += e;
        let w = e / total;
        avg.iter_mut().zip(v).for_each(|(a, x)| *a += w * (x - *a));
    }
    avg
}

fn oracle_equivalence() -> Result<CriterionResult> {
    let mut rng = substream(ROOT_SEED, Stream::Delay);
    let instances = 1000;
    let (mut queue_ok, mut missing_ok, mut index_ok) = (0, 0, 0);
    let mut max_err: f64 = 0.0;
    for i in 0..instances {
        let horizon = rng.random_range(1..=200u64);
        let delays = random_schedule(&mut rng, horizon).realize(horizon)?;

        let mut queue = DeliveryQueue::new();
        let mut same = true;
        for t in 1..=horizon {
            queue.enqueue(FeedbackEvent { origin: t, arrival: t + delays[t as usize - 1], loss: 0.0, action: () })?;
            let got: Vec<u64> = queue.drain(t)?.iter().map(|e| e.origin).collect();
            let want: Vec<u64> = (1..=t).filter(|&s| s + delays[s as usize - 1] == t).collect();
            same &= got == want;
        }
        queue_ok += u32::from(same);
        let naive_m: Vec<u64> = (1..=horizon).filter(|&s| s + delays[s as usize - 1] > horizon).collect();
        missing_ok += u32::from(queue.len() == naive_m.len() && missing_set(&delays, horizon) == naive_m);

        let mut learner_rng = substream(ROOT_SEED + i, Stream::Learner);
        let opts = RunOptions { checkpoints: Vec::new(), record: true };
        let telemetry: Vec<_> = if i % 2 == 0 {
            let mut l = wrapped_exp3(3, GammaMode::Zero, i)?;
            let mut adv: Adversary<usize, ArmLosses> = Adversary::Oblivious(Box::new(|t| ArmLosses(vec![0.2, (t % 2) as f64, 0.7])));
            run(&mut l, &mut adv, ArmComparator::new(3), &delays, horizon, &opts, &mut learner_rng)?
                .trajectory
                .iter()
                .map(|r| r.telemetry.expect("wrapped"))
                .collect()
        } else {
            let body = ConvexBody::ball(2, 1.0)?;
            let mut l = wrapped_fkm(body.clone(), 0.75, 1.0, i)?;
            let loss = ConvexLoss::Quadratic { scale: 0.25, center: vec![0.5, 0.0], offset: 0.0 };
            let mut adv: Adversary<Vec<f64>, ConvexLoss> = Adversary::Oblivious(Box::new(move |_| loss.clone()));
            run(&mut l, &mut adv, ConvexComparator::new(body), &delays, horizon, &opts, &mut learner_rng)?
                .trajectory
                .iter()
                .map(|r| r.telemetry.expect("wrapped"))
                .collect()
        };
        let shape = if i % 2 == 0 { RegretShape::exp3(3) } else { RegretShape::fkm(2, 2.0, 0.75) };
        let naive = naive_indices(&delays, horizon, &shape);
        index_ok += u32::from(
            telemetry.iter().zip(&naive).all(|(tm, n)| (tm.w, tm.h, tm.nu, tm.m_t, tm.missing_cumsum, tm.restarted) == *n),
        );

        let profiles = rng.random_range(2..=6usize);
        let etas: Vec<f64> = (0..horizon).map(|_| rng.random_range(1e-4..1.0)).collect();
        let played: Vec<usize> = (0..horizon).map(|_| rng.random_range(0..profiles)).collect();
        let indicators: Vec<Vec<f64>> =
            played.iter().map(|&p| (0..profiles).map(|q| f64::from(u8::from(p == q))).collect()).collect();
        let joint: Vec<Vec<f64>> = (0..horizon)
            .map(|_| {
                let raw: Vec<f64> = (0..profiles).map(|_| rng.random::<f64>() + 1e-3).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let points: Vec<Vec<f64>> = (0..horizon).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        for (got, want) in [
            (discounted_ergodic_distribution(&played, &etas, profiles), running_average(&indicators, &etas)),
            (discounted_ergodic_mixture(&joint, &etas), running_average(&joint, &etas)),
            (discounted_ergodic_average(&points, &etas), running_average(&points, &etas)),
        ] {
            max_err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(max_err, f64::max);
        }
    }
    let n = instances as u32;
    Ok(CriterionResult {
        id: 12,
        name: "delivery pipeline and statistics match naive oracles",
        passed: queue_ok == n && missing_ok == n && index_ok == n && max_err <= 1e-12,
        measured: format!(
            "deliveries {queue_ok}/{n}, missing sets {missing_ok}/{n}, wrapper indices {index_ok}/{n}, ergodic max error {max_err:.1e}"
        ),
        threshold: "all exact, ergodic error <= 1e-12".into(),
        notes: "random schedules with T <= 200".into(),
    })
}

/// Run every criterion. `sabotage` breaks the EXP3 long-delay filter in
/// the stability stress runs, which must turn criterion 6 red.
pub fn run_suite(tier: Tier, sabotage: bool) -> Result<Vec<CriterionResult>> {
    run_suite_with(tier, sabotage, |_| {})
}

/// As [`run_suite`], reporting each result as soon as it is known.
pub fn run_suite_with(tier: Tier, sabotage: bool, mut on_result: impl FnMut(&CriterionResult)) -> Result<Vec<CriterionResult>> {
    let mut stab = Stability::default();
    let mut results = Vec::new();
    let mut push = |r: CriterionResult, results: &mut Vec<CriterionResult>| {
        on_result(&r);
        results.push(r);
    };
    push(exp3_ceiling(tier, &mut stab)?, &mut results);
    push(exp3_rate(tier, &mut stab)?, &mut results);
    push(fkm_ceiling(tier)?, &mut results);
    push(fkm_rate(tier)?, &mut results);
    push(estimator_bias()?, &mut results);
    push(doubling_invariants()?, &mut results);
    push(agnostic_vs_known(tier, &mut stab)?, &mut results);
    push(zero_sum_convergence(tier, &mut stab)?, &mut results);
    let (a, b) = linear_regret(tier, &mut stab)?;
    push(a, &mut results);
    push(b, &mut results);
    push(cce_emergence(tier, &mut stab)?, &mut results);
    push(oracle_equivalence()?, &mut results);
    stability_stress(tier.seeds(), sabotage, &mut stab)?;
    push(stability_result(&stab, sabotage), &mut results);
    results.sort_by_key(|r| r.id);
    Ok(results)
}
