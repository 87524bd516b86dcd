use rand_chacha::ChaCha8Rng;

use crate::doubling::Telemetry;
use crate::error::Result;
use crate::queue::FeedbackEvent;

pub type SimRng = ChaCha8Rng;

/// Outcome of applying one round's delivered feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateReport {
    pub applied: usize,
    pub rejected: usize,
    /// Sum of the delays of rejected samples.
    pub rejected_delay_sum: u64,
    /// Largest `p_{s-}^{(i)} / p_s^{(i)}` seen, 0 if nothing was applied.
    pub max_ratio: f64,
    pub violations: usize,
}

impl Default for UpdateReport {
    fn default() -> Self {
        Self { applied: 0, rejected: 0, rejected_delay_sum: 0, max_ratio: 0.0, violations: 0 }
    }
}

impl UpdateReport {
    pub fn merge(&mut self, other: UpdateReport) {
        self.applied += other.applied;
        self.rejected += other.rejected;
        self.rejected_delay_sum += other.rejected_delay_sum;
        self.max_ratio = self.max_ratio.max(other.max_ratio);
        self.violations += other.violations;
    }
}

/// A learner that acts every round and is updated with whatever feedback
/// the environment delivers that round.
pub trait DelayedLearner {
    type Action: Clone;

    fn act(&mut self, round: u64, rng: &mut SimRng) -> Self::Action;

    fn update(&mut self, batch: &[FeedbackEvent<Self::Action>]) -> Result<UpdateReport>;

    /// Step size applied to the sample of `round`.
    fn eta(&self, round: u64) -> f64;

    /// Current mixed strategy, for learners over finitely many actions.
    fn distribution(&self) -> Option<&[f64]> {
        None
    }

    /// Index state, for learners wrapped in the doubling trick.
    fn telemetry(&self) -> Option<Telemetry> {
        None
    }
}
