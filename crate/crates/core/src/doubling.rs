//! Two-dimensional doubling trick.
//!
//! A time index `h` tracks `2^{h-1} <= t < 2^h` and a delay index `w` tracks
//! the cumulative count of missing samples. The `(w, h)` plane is cut into
//! super-epochs according to which term of the wrapped algorithm's regret
//! bound `k1 D^d + k2 T^c + k3 T^a D^b` dominates; on entering a new
//! super-epoch the learner is rebuilt with parameters tuned for the largest
//! `(T, D) = (2^h, 2^w)` that super-epoch can reach. Samples never cross a
//! super-epoch boundary.

use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::error::Result;
use crate::exp3::{Exp3, GammaMode};
use crate::fkm::{clamp_delta, Fkm};
use crate::learner::{DelayedLearner, SimRng, UpdateReport};
use crate::queue::FeedbackEvent;
use crate::rng::{substream, Stream};
use crate::step::StepSchedule;

/// Largest index the partition scan will consider.
pub const MAX_INDEX: u32 = 62;

/// Coefficients of a regret bound `k1 D^d + k2 T^c + k3 T^a D^b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegretShape {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RegretShape {
    fn time_rule(&self, w: u32, h: u32) -> bool {
        let (w, h) = (w as f64, h as f64);
        2.0 * self.k2 * (self.c * h).exp2() >= self.k1 * (self.d * w).exp2() + self.k3 * (self.a * h + self.b * w).exp2()
    }

    fn delay_rule(&self, w: u32, h: u32) -> bool {
        let (w, h) = (w as f64, h as f64);
        2.0 * self.k1 * (self.d * w).exp2() >= self.k2 * (self.c * h).exp2() + self.k3 * (self.a * h + self.b * w).exp2()
    }

    /// EXP3 with `eta = e^-2/2 sqrt(ln K / (KT + D))`. Splitting
    /// `sqrt(KT + D) <= sqrt(KT) + sqrt(D)` in `ln K / eta + 4 eta (KT + D)`
    /// gives `(2e^2 + 2e^-2) sqrt(ln K) (sqrt(KT) + sqrt(D))`; the missing and
    /// discarded counts add at most `sqrt(2D)` and `sqrt(D ln K)`.
    pub fn exp3(arms: usize) -> Self {
        let k = arms as f64;
        let lead = 2.0 * (2.0f64).exp() + 2.0 * (-2.0f64).exp();
        Self {
            k1: lead * k.ln().sqrt() + 2f64.sqrt() + k.ln().sqrt(),
            k2: lead * (k * k.ln()).sqrt(),
            k3: 0.0,
            a: 0.0,
            b: 0.0,
            c: 0.5,
            d: 0.5,
        }
    }

    /// FKM with the tuned `eta, delta`. Term by term, with `T^{1/3} D^{1/3}`
    /// also bounding half the missing count:
    /// `T^{3/4}`: `(3 + |K|) L + |K| n`;
    /// `T^{1/3} D^{1/3}`: `(3 + |K|) L + |K| sqrt(n) / 2 + 2 L |K| sqrt(n) + 2`.
    pub fn fkm(n: usize, diameter: f64, lipschitz: f64) -> Self {
        let n = n as f64;
        Self {
            k1: 0.0,
            k2: (3.0 + diameter) * lipschitz + diameter * n,
            k3: (3.0 + diameter) * lipschitz + diameter * n.sqrt() / 2.0 + 2.0 * lipschitz * diameter * n.sqrt() + 2.0,
            a: 1.0 / 3.0,
            b: 1.0 / 3.0,
            c: 0.75,
            d: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperEpochKind {
    TimeDominated,
    DelayDominated,
    Singleton,
}

/// Which super-epoch type `(w, h)` belongs to; the time rule wins ties.
pub fn classify(w: u32, h: u32, shape: &RegretShape) -> SuperEpochKind {
    if shape.time_rule(w, h) {
        SuperEpochKind::TimeDominated
    } else if shape.delay_rule(w, h) {
        SuperEpochKind::DelayDominated
    } else {
        SuperEpochKind::Singleton
    }
}

/// A super-epoch identified by its type and defining index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuperEpoch {
    pub kind: SuperEpochKind,
    pub w: u32,
    pub h: u32,
}

impl SuperEpoch {
    pub fn containing(w: u32, h: u32, shape: &RegretShape) -> Self {
        Self { kind: classify(w, h, shape), w, h }
    }

    pub fn contains(&self, w: u32, h: u32, shape: &RegretShape) -> bool {
        classify(w, h, shape) == self.kind
            && match self.kind {
                SuperEpochKind::TimeDominated => h == self.h,
                SuperEpochKind::DelayDominated => w == self.w,
                SuperEpochKind::Singleton => (w, h) == (self.w, self.h),
            }
    }

    /// Largest `(w, h)` in the super-epoch.
    pub fn max_indices(&self, shape: &RegretShape) -> (u32, u32) {
        match self.kind {
            SuperEpochKind::TimeDominated => {
                let mut w = self.w;
                while w < MAX_INDEX && self.contains(w + 1, self.h, shape) {
                    w += 1;
                }
                (w, self.h)
            }
            SuperEpochKind::DelayDominated => {
                let mut h = self.h;
                while h < MAX_INDEX && self.contains(self.w, h + 1, shape) {
                    h += 1;
                }
                (self.w, h)
            }
            SuperEpochKind::Singleton => (self.w, self.h),
        }
    }
}

/// Index bookkeeping: `w`, `h` and the missing-sample count restricted to
/// the current super-epoch.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Indices {
    pub w: u32,
    pub h: u32,
    pub missing_cumsum: u64,
    pub epoch_start: u64,
    pub received_in_epoch: u64,
    pub m_t: u64,
}

impl Indices {
    pub fn new() -> Self {
        Self { epoch_start: 1, ..Self::default() }
    }

    /// Account for round `t` after `received` same-super-epoch samples were
    /// delivered in it, then advance the indices. Returns `m_t`.
    pub fn observe_round(&mut self, t: u64, received: u64) -> u64 {
        self.received_in_epoch += received;
        self.m_t = (t - self.epoch_start + 1) - self.received_in_epoch;
        self.missing_cumsum += self.m_t;
        while self.w < 63 && self.missing_cumsum >= 1u64 << self.w {
            self.w += 1;
        }
        while self.h < 63 && t >= 1u64 << self.h {
            self.h += 1;
        }
        self.m_t
    }

    pub fn start_epoch(&mut self, first_round: u64) {
        self.epoch_start = first_round;
        self.received_in_epoch = 0;
    }
}

/// Per-super-epoch statistics, frozen when the super-epoch ends.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub nu: u32,
    pub epoch: SuperEpoch,
    /// Indices the learner was tuned for.
    pub tuned: (u32, u32),
    pub first_round: u64,
    pub last_round: u64,
    pub missing_sum: u64,
    /// `m_t` of the last round, the one whose index crossing ended it.
    pub last_m: u64,
}

impl EpochRecord {
    /// Cap on the super-epoch's missing count, when it has one.
    pub fn missing_cap(&self) -> Option<u64> {
        match self.epoch.kind {
            SuperEpochKind::DelayDominated => Some(if self.epoch.w == 0 { 0 } else { 1 << (self.epoch.w - 1) }),
            SuperEpochKind::TimeDominated => Some(1 << self.tuned.0),
            SuperEpochKind::Singleton => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Telemetry {
    pub w: u32,
    pub h: u32,
    pub nu: u32,
    pub m_t: u64,
    pub missing_cumsum: u64,
    pub restarted: bool,
}

/// Builds a learner tuned for `(T, D) = (2^h, 2^w)`.
pub trait LearnerFactory {
    type Learner: DelayedLearner;
    fn build(&mut self, w: u32, h: u32) -> Result<Self::Learner>;
}

impl<L: DelayedLearner, F: FnMut(u32, u32) -> Result<L>> LearnerFactory for F {
    type Learner = L;
    fn build(&mut self, w: u32, h: u32) -> Result<L> {
        self(w, h)
    }
}

pub struct DoublingWrapper<F: LearnerFactory> {
    shape: RegretShape,
    factory: F,
    learner: F::Learner,
    indices: Indices,
    epoch: SuperEpoch,
    nu: u32,
    seed: u64,
    rng: SimRng,
    round: u64,
    records: Vec<EpochRecord>,
    current: EpochRecord,
    cross_discards: u64,
    telemetry: Telemetry,
}

impl<F: LearnerFactory> DoublingWrapper<F> {
    /// The wrapper draws learner randomness from its own per-super-epoch
    /// streams under `seed`.
    pub fn new(shape: RegretShape, mut factory: F, seed: u64) -> Result<Self> {
        let epoch = SuperEpoch::containing(0, 0, &shape);
        let tuned = epoch.max_indices(&shape);
        let learner = factory.build(tuned.0, tuned.1)?;
        Ok(Self {
            shape,
            factory,
            learner,
            indices: Indices::new(),
            epoch,
            nu: 0,
            seed,
            rng: substream(seed, Stream::SuperEpoch(0)),
            round: 0,
            records: Vec::new(),
            current: EpochRecord { nu: 0, epoch, tuned, first_round: 1, last_round: 0, missing_sum: 0, last_m: 0 },
            cross_discards: 0,
            telemetry: Telemetry::default(),
        })
    }

    pub fn shape(&self) -> &RegretShape {
        &self.shape
    }

    pub fn learner(&self) -> &F::Learner {
        &self.learner
    }

    pub fn indices(&self) -> &Indices {
        &self.indices
    }

    pub fn restarts(&self) -> u32 {
        self.nu
    }

    pub fn cross_epoch_discards(&self) -> u64 {
        self.cross_discards
    }

    pub fn telemetry(&self) -> Telemetry {
        self.telemetry
    }

    /// Finished super-epochs followed by the running one.
    pub fn epoch_records(&self) -> Vec<EpochRecord> {
        let mut all = self.records.clone();
        if self.current.last_round >= self.current.first_round {
            all.push(self.current.clone());
        }
        all
    }

    /// Seed of the learner stream used in super-epoch `nu`.
    pub fn epoch_rng(seed: u64, nu: u32) -> SimRng {
        substream(seed, Stream::SuperEpoch(nu))
    }
}

impl<F: LearnerFactory> DelayedLearner for DoublingWrapper<F>
where
    <F::Learner as DelayedLearner>::Action: Clone,
{
    type Action = <F::Learner as DelayedLearner>::Action;

    /// The caller's generator is not used; see [`DoublingWrapper::new`].
    fn act(&mut self, round: u64, _rng: &mut SimRng) -> Self::Action {
        self.round = round;
        self.learner.act(round, &mut self.rng)
    }

    fn update(&mut self, batch: &[FeedbackEvent<Self::Action>]) -> Result<UpdateReport> {
        let t = self.round;
        let start = self.indices.epoch_start;
        let in_epoch: Vec<FeedbackEvent<Self::Action>> = batch.iter().filter(|e| e.origin >= start).cloned().collect();
        self.cross_discards += (batch.len() - in_epoch.len()) as u64;

        let m_t = self.indices.observe_round(t, in_epoch.len() as u64);
        self.current.last_round = t;
        self.current.missing_sum += m_t;
        self.current.last_m = m_t;

        let (w, h) = (self.indices.w, self.indices.h);
        let restarted = !self.epoch.contains(w, h, &self.shape);
        let report = if restarted {
            // this round's deliveries belong to the learner being retired
            self.nu += 1;
            self.epoch = SuperEpoch::containing(w, h, &self.shape);
            let tuned = self.epoch.max_indices(&self.shape);
            self.learner = self.factory.build(tuned.0, tuned.1)?;
            self.rng = substream(self.seed, Stream::SuperEpoch(self.nu));
            self.indices.start_epoch(t + 1);
            let done = std::mem::replace(
                &mut self.current,
                EpochRecord { nu: self.nu, epoch: self.epoch, tuned, first_round: t + 1, last_round: t, missing_sum: 0, last_m: 0 },
            );
            self.records.push(done);
            UpdateReport::default()
        } else {
            self.learner.update(&in_epoch)?
        };
        self.telemetry = Telemetry {
            w,
            h,
            nu: self.nu,
            m_t,
            missing_cumsum: self.indices.missing_cumsum,
            restarted,
        };
        Ok(report)
    }

    fn eta(&self, round: u64) -> f64 {
        self.learner.eta(round)
    }

    fn distribution(&self) -> Option<&[f64]> {
        self.learner.distribution()
    }

    fn telemetry(&self) -> Option<Telemetry> {
        Some(self.telemetry)
    }
}

/// EXP3 step size for `(T, D) = (2^h, 2^w)`.
pub fn exp3_eta(arms: usize, w: u32, h: u32) -> f64 {
    let k = arms as f64;
    0.5 * (-2.0f64).exp() * (k.ln() / (k * (h as f64).exp2()).max((w as f64).exp2())).sqrt()
}

/// FKM step size and radius for `(T, D) = (2^h, 2^w)`.
pub fn fkm_params(n: usize, diameter: f64, delta0: f64, w: u32, h: u32) -> (f64, f64) {
    let (n, w, h) = (n as f64, w as f64, h as f64);
    let eta = diameter * ((-0.75 * h).exp2() / n).min((-(h + w) / 3.0).exp2() / n.sqrt());
    let delta = delta0 * (-h / 4.0).exp2().max(((w - 2.0 * h) / 3.0).exp2());
    (eta, clamp_delta(delta))
}

pub type Exp3Factory = Box<dyn FnMut(u32, u32) -> Result<Exp3> + Send>;
pub type FkmFactory = Box<dyn FnMut(u32, u32) -> Result<Fkm> + Send>;

pub fn wrapped_exp3(arms: usize, gamma: GammaMode, seed: u64) -> Result<DoublingWrapper<Exp3Factory>> {
    let factory: Exp3Factory = Box::new(move |w, h| Exp3::new(arms, StepSchedule::fixed(exp3_eta(arms, w, h)), gamma));
    DoublingWrapper::new(RegretShape::exp3(arms), factory, seed)
}

pub fn wrapped_fkm(body: ConvexBody, lipschitz: f64, delta0: f64, seed: u64) -> Result<DoublingWrapper<FkmFactory>> {
    let n = body.dim();
    let diameter = body.diameter();
    let shape = RegretShape::fkm(n, diameter, lipschitz);
    let factory: FkmFactory = Box::new(move |w, h| {
        let (eta, delta) = fkm_params(n, diameter, delta0, w, h);
        Fkm::new(body.clone(), delta, StepSchedule::fixed(eta))
    });
    DoublingWrapper::new(shape, factory, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_shape() -> RegretShape {
        RegretShape { k1: 1.0, k2: 1.0, k3: 0.0, a: 0.0, b: 0.0, c: 0.5, d: 0.5 }
    }

    #[test]
    fn classification_examples() {
        let s = unit_shape();
        assert_eq!(classify(0, 10, &s), SuperEpochKind::TimeDominated);
        assert_eq!(classify(10, 0, &s), SuperEpochKind::DelayDominated);
        let heavy = RegretShape { k3: 1e6, ..s };
        assert_eq!(classify(5, 5, &heavy), SuperEpochKind::Singleton);
        // equal terms satisfy both rules; the time rule wins
        assert_eq!(classify(4, 4, &s), SuperEpochKind::TimeDominated);
    }

    #[test]
    fn exp3_shape_never_has_singletons() {
        let s = RegretShape::exp3(5);
        for w in 0..40 {
            for h in 0..40 {
                assert_ne!(classify(w, h, &s), SuperEpochKind::Singleton);
            }
        }
    }

    #[test]
    fn missing_count_without_feedback() {
        let mut ix = Indices::new();
        for t in 1..=4 {
            assert_eq!(ix.observe_round(t, 0), t);
        }
        assert_eq!(ix.missing_cumsum, 10);
        assert_eq!(ix.w, 4);
        assert_eq!(ix.h, 3);
    }

    #[test]
    fn missing_count_with_unit_delay() {
        let mut ix = Indices::new();
        assert_eq!(ix.observe_round(1, 0), 1);
        for t in 2..=50 {
            assert_eq!(ix.observe_round(t, 1), 1);
            assert_eq!(ix.missing_cumsum, t);
            assert!(1u64 << (ix.w - 1) <= t && t < 1u64 << ix.w);
            assert!(1u64 << (ix.h - 1) <= t && t < 1u64 << ix.h);
        }
    }

    #[test]
    fn preset_parameters() {
        assert!((exp3_eta(2, 0, 10) - 0.001245).abs() < 5e-7);
        let k = 3.0f64;
        assert!((exp3_eta(3, 0, 0) - 0.5 * (-2.0f64).exp() * (k.ln() / k).sqrt()).abs() < 1e-15);
        let (_, delta) = fkm_params(2, 2.0, 0.5, 0, 8);
        assert!((delta - 0.125).abs() < 1e-15);
        let (eta, _) = fkm_params(2, 2.0, 0.5, 0, 8);
        assert!((eta - 2.0 * (0.5 * 2f64.powf(-6.0)).min(2f64.powf(-8.0 / 3.0) / 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn super_epoch_maxima() {
        let s = unit_shape();
        // time rule at h = 4: 2 * 4 >= 2^{w/2} holds up to w = 6
        let e = SuperEpoch::containing(0, 4, &s);
        assert_eq!(e.max_indices(&s), (6, 4));
        // delay rule at w = 10: 2 * 32 >= 2^{h/2} while the time rule fails (h <= 7)
        let e = SuperEpoch::containing(10, 0, &s);
        assert_eq!(e.kind, SuperEpochKind::DelayDominated);
        assert_eq!(e.max_indices(&s), (10, 7));
        assert!(!e.contains(10, 8, &s));
    }
}
