//! EXP3 with delayed bandit feedback. Samples whose delay is long relative
//! to their step size are discarded; the rest update the cumulative loss
//! estimates in arrival order.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{DelayedLearner, SimRng, UpdateReport};
use crate::queue::FeedbackEvent;
use crate::step::StepSchedule;

const E2: f64 = std::f64::consts::E * std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    /// Plain importance weighting, for oblivious adversaries.
    Zero,
    /// Implicit exploration with `gamma_t = eta_t`.
    EqualEta,
}

/// Record of one applied sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Exp3Snapshot {
    pub origin: u64,
    pub before: Vec<f64>,
    pub at_origin: Vec<f64>,
    pub ratio_max: f64,
}

#[derive(Debug, Clone)]
struct Play {
    arm: usize,
    probs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Exp3 {
    log_weights: Vec<f64>,
    probs: Vec<f64>,
    schedule: StepSchedule,
    gamma: GammaMode,
    plays: HashMap<u64, Play>,
    filter_scale: f64,
    strict: bool,
}

/// Whether a sample with this delay survives the long-delay rule.
pub fn accepts(delay: u64, eta: f64) -> bool {
    delay as f64 <= 1.0 / (E2 * eta) - 1.0
}

/// Step size tuned for a known horizon and delay sum.
pub fn fixed_eta(arms: usize, horizon: u64, received_delay_sum: u64) -> f64 {
    let k = arms as f64;
    (-2.0f64).exp() / 2.0 * (k.ln() / (k * horizon as f64 + received_delay_sum as f64)).sqrt()
}

/// Right-hand side of the expected-regret bound for fixed `eta`:
/// `ln K / eta + 4 eta K T + 4 eta sum_{t not in M*} d_t + |M| + |D|`.
pub fn regret_bound(arms: usize, horizon: u64, eta: f64, kept_delay_sum: u64, missing: u64, discarded: u64) -> f64 {
    let k = arms as f64;
    k.ln() / eta + 4.0 * eta * k * horizon as f64 + 4.0 * eta * kept_delay_sum as f64 + missing as f64 + discarded as f64
}

impl Exp3 {
    pub fn new(arms: usize, schedule: StepSchedule, gamma: GammaMode) -> Result<Self> {
        if arms < 2 {
            return Err(Error::Config(format!("EXP3 needs at least 2 arms, got {arms}")));
        }
        let eta1 = schedule.at(1);
        if !(eta1 > 0.0 && eta1 < (-2.0f64).exp() / 2.0) {
            return Err(Error::Config(format!("EXP3 needs 0 < eta_1 < e^-2/2, got {eta1}")));
        }
        Ok(Self {
            log_weights: vec![0.0; arms],
            probs: vec![1.0 / arms as f64; arms],
            schedule,
            gamma,
            plays: HashMap::new(),
            filter_scale: 1.0,
            strict: false,
        })
    }

    /// Fail the update instead of counting a stability violation.
    pub fn strict(mut self) -> Self {
        self.strict = true;
        self
    }

    /// Test-harness hook: evaluate the long-delay rule with a step size
    /// `scale` times too small, so that samples the analysis requires to be
    /// dropped get applied.
    pub fn sabotage_filter(mut self, scale: f64) -> Self {
        self.filter_scale = scale;
        self
    }

    pub fn arms(&self) -> usize {
        self.probs.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn schedule(&self) -> &StepSchedule {
        &self.schedule
    }

    pub fn accepts(&self, event: &FeedbackEvent<usize>) -> bool {
        accepts(event.delay(), self.schedule.at(event.origin) * self.filter_scale)
    }

    fn renormalize(&mut self) {
        let m = self.log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (p, lw) in self.probs.iter_mut().zip(&self.log_weights) {
            *p = (lw - m).exp();
            sum += *p;
        }
        self.probs.iter_mut().for_each(|p| *p /= sum);
    }

    /// Apply one accepted sample.
    pub fn apply(&mut self, event: &FeedbackEvent<usize>) -> Result<Exp3Snapshot> {
        let play = self.plays.remove(&event.origin).ok_or(Error::UnknownOrigin(event.origin))?;
        let eta = self.schedule.at(event.origin);
        let gamma = match self.gamma {
            GammaMode::Zero => 0.0,
            GammaMode::EqualEta => eta,
        };
        let ratio_max = self
            .probs
            .iter()
            .zip(&play.probs)
            .map(|(now, then)| now / then)
            .fold(0.0, f64::max);
        let before = self.probs.clone();
        self.log_weights[play.arm] -= eta * event.loss / (play.probs[play.arm] + gamma);
        self.renormalize();
        Ok(Exp3Snapshot { origin: event.origin, before, at_origin: play.probs, ratio_max })
    }

    /// Filter and apply a batch, returning the snapshots of applied samples.
    pub fn update_with_snapshots(&mut self, batch: &[FeedbackEvent<usize>]) -> Result<(UpdateReport, Vec<Exp3Snapshot>)> {
        let mut report = UpdateReport::default();
        let mut snaps = Vec::with_capacity(batch.len());
        for event in batch {
            if !self.accepts(event) {
                self.plays.remove(&event.origin).ok_or(Error::UnknownOrigin(event.origin))?;
                report.rejected += 1;
                report.rejected_delay_sum += event.delay();
                continue;
            }
            let snap = self.apply(event)?;
            report.applied += 1;
            report.max_ratio = report.max_ratio.max(snap.ratio_max);
            if snap.ratio_max > E2 * (1.0 + 1e-9) {
                if self.strict {
                    return Err(Error::StabilityViolation { origin: snap.origin, ratio: snap.ratio_max });
                }
                report.violations += 1;
            }
            snaps.push(snap);
        }
        Ok((report, snaps))
    }
}

impl DelayedLearner for Exp3 {
    type Action = usize;

    fn act(&mut self, round: u64, rng: &mut SimRng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut arm = self.probs.len() - 1;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                arm = i;
                break;
            }
        }
        self.plays.insert(round, Play { arm, probs: self.probs.clone() });
        arm
    }

    fn update(&mut self, batch: &[FeedbackEvent<usize>]) -> Result<UpdateReport> {
        self.update_with_snapshots(batch).map(|(r, _)| r)
    }

    fn eta(&self, round: u64) -> f64 {
        self.schedule.at(round)
    }

    fn distribution(&self) -> Option<&[f64]> {
        Some(&self.probs)
    }
}
