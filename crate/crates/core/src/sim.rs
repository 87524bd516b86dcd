//! Single-learner round loop.

use crate::cost::{check_range, Adversary, Comparator, Cost};
use crate::doubling::Telemetry;
use crate::error::{Error, Result};
use crate::learner::{DelayedLearner, SimRng};
use crate::queue::{DeliveryQueue, FeedbackEvent};

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord<A> {
    pub t: u64,
    pub action: A,
    pub loss: f64,
    pub delay: u64,
    pub arrival: u64,
    /// Samples applied by the learner this round.
    pub feedback_used: usize,
    pub cum_regret: f64,
    pub eta: f64,
    pub telemetry: Option<Telemetry>,
}

/// Regret of the prefix `1..=t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    pub regret: f64,
    pub expected_regret: Option<f64>,
    pub discounted_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome<A> {
    pub horizon: u64,
    pub regret: f64,
    /// `sum <l_t, p_t> - min_i sum l_t^{(i)}` for learners with a mixed strategy.
    pub expected_regret: Option<f64>,
    pub discounted_ratio: f64,
    pub eta_sum: f64,
    /// `|M|`: samples still in flight at the end.
    pub missing: u64,
    /// `sum_{t not in M} d_t`
    pub received_delay_sum: u64,
    /// `|D|`: samples dropped by the learner's long-delay rule.
    pub discarded: u64,
    /// `sum_{t not in M u D} d_t`
    pub kept_delay_sum: u64,
    pub max_ratio: f64,
    pub violations: u64,
    pub restarts: u32,
    pub checkpoints: Vec<Checkpoint>,
    pub trajectory: Vec<RoundRecord<A>>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Prefix lengths at which to report regret.
    pub checkpoints: Vec<u64>,
    /// Keep one record per round.
    pub record: bool,
}

/// Play `horizon` rounds. `delays[t - 1]` is the delay of round `t`.
pub fn run<L, C, K>(
    learner: &mut L,
    adversary: &mut Adversary<L::Action, C>,
    comparator: K,
    delays: &[u64],
    horizon: u64,
    options: &RunOptions,
    rng: &mut SimRng,
) -> Result<RunOutcome<L::Action>>
where
    L: DelayedLearner,
    C: Cost<Action = L::Action>,
    K: Comparator<C> + Clone,
{
    if (delays.len() as u64) < horizon {
        return Err(Error::ScheduleExhausted { round: delays.len() as u64 + 1, len: delays.len() });
    }
    let mut queue = DeliveryQueue::new();
    let mut history = Vec::new();
    let mut plain = comparator.clone();
    let mut weighted = comparator;
    let (mut incurred, mut incurred_weighted, mut eta_sum) = (0.0, 0.0, 0.0);
    let mut expected: Option<f64> = Some(0.0);
    let mut out = RunOutcome {
        horizon,
        regret: 0.0,
        expected_regret: None,
        discounted_ratio: 0.0,
        eta_sum: 0.0,
        missing: 0,
        received_delay_sum: 0,
        discarded: 0,
        kept_delay_sum: 0,
        max_ratio: 0.0,
        violations: 0,
        restarts: 0,
        checkpoints: Vec::new(),
        trajectory: Vec::new(),
    };
    let mut rejected_delay_sum = 0;
    let mut next_checkpoint = options.checkpoints.iter().copied().filter(|&c| c <= horizon).peekable();

    for t in 1..=horizon {
        let cost = adversary.cost(t, &history);
        cost.validate(t)?;
        let exp_loss = learner.distribution().and_then(|p| cost.expected(p));
        let action = learner.act(t, rng);
        let eta = learner.eta(t);
        let loss = check_range(cost.value(&action), t)?;
        let delay = delays[t as usize - 1];
        if delay == 0 {
            return Err(Error::InvalidDelay { round: t, delay });
        }
        queue.enqueue(FeedbackEvent { origin: t, arrival: t + delay, loss, action: action.clone() })?;
        let batch = queue.drain(t)?;
        out.received_delay_sum += batch.iter().map(|e| e.delay()).sum::<u64>();
        let report = learner.update(&batch)?;
        out.discarded += report.rejected as u64;
        rejected_delay_sum += report.rejected_delay_sum;
        out.max_ratio = out.max_ratio.max(report.max_ratio);
        out.violations += report.violations as u64;

        incurred += loss;
        incurred_weighted += eta * loss;
        eta_sum += eta;
        expected = expected.zip(exp_loss).map(|(a, b)| a + b);
        plain.add(&cost, 1.0);
        weighted.add(&cost, eta);

        let telemetry = learner.telemetry();
        if telemetry.is_some_and(|tm| tm.restarted) {
            out.restarts += 1;
        }
        let at_checkpoint = next_checkpoint.next_if_eq(&t).is_some();
        if options.record || at_checkpoint {
            let best = plain.best();
            let regret = incurred - best;
            if at_checkpoint {
                out.checkpoints.push(Checkpoint {
                    t,
                    regret,
                    expected_regret: expected.map(|e| e - best),
                    discounted_ratio: (incurred_weighted - weighted.best()) / eta_sum,
                });
            }
            if options.record {
                out.trajectory.push(RoundRecord {
                    t,
                    action: action.clone(),
                    loss,
                    delay,
                    arrival: t + delay,
                    feedback_used: report.applied,
                    cum_regret: regret,
                    eta,
                    telemetry,
                });
            }
        }
        if !adversary.is_oblivious() {
            history.push(action);
        }
    }

    let best = plain.best();
    out.regret = incurred - best;
    out.expected_regret = expected.map(|e| e - best);
    out.discounted_ratio = (incurred_weighted - weighted.best()) / eta_sum;
    out.eta_sum = eta_sum;
    out.missing = queue.len() as u64;
    out.kept_delay_sum = out.received_delay_sum - rejected_delay_sum;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{ArmComparator, ArmLosses};
    use crate::delay::{missing_set, received_delay_sum, DelaySchedule};
    use crate::exp3::{Exp3, GammaMode};
    use crate::rng::{substream, Stream};
    use crate::step::StepSchedule;

    fn alternating() -> Adversary<usize, ArmLosses> {
        Adversary::Oblivious(Box::new(|t| ArmLosses(if t % 3 == 0 { vec![0.0, 1.0, 0.5] } else { vec![0.7, 0.2, 0.4] })))
    }

    #[test]
    fn bookkeeping_matches_schedule() {
        let delays = DelaySchedule::PowerLaw { alpha: 0.75 }.realize(500).unwrap();
        let mut e = Exp3::new(3, StepSchedule::fixed(0.05), GammaMode::Zero).unwrap();
        let mut rng = substream(1, Stream::Learner);
        let opts = RunOptions { checkpoints: vec![100, 500], record: true };
        let out = run(&mut e, &mut alternating(), ArmComparator::new(3), &delays, 500, &opts, &mut rng).unwrap();
        assert_eq!(out.missing, missing_set(&delays, 500).len() as u64);
        assert_eq!(out.received_delay_sum, received_delay_sum(&delays, 500));
        assert_eq!(out.trajectory.len(), 500);
        assert_eq!(out.checkpoints.len(), 2);
        assert!((out.checkpoints[1].regret - out.regret).abs() < 1e-9);
        // with eta = 0.05 the filter keeps delays up to 1.7
        assert!(out.discarded > 0);
        assert_eq!(out.violations, 0);
    }

    #[test]
    fn out_of_range_cost_aborts() {
        let mut e = Exp3::new(2, StepSchedule::fixed(0.05), GammaMode::Zero).unwrap();
        let mut adv: Adversary<usize, ArmLosses> =
            Adversary::Oblivious(Box::new(|t| ArmLosses(vec![0.5, if t == 7 { 1.5 } else { 0.5 }])));
        let mut rng = substream(1, Stream::Learner);
        let r = run(&mut e, &mut adv, ArmComparator::new(2), &[1; 10], 10, &RunOptions::default(), &mut rng);
        assert_eq!(r.unwrap_err(), Error::CostOutOfRange { round: 7, value: 1.5 });
    }

    #[test]
    fn adaptive_adversary_sees_history() {
        let mut e = Exp3::new(2, StepSchedule::fixed(0.05), GammaMode::EqualEta).unwrap();
        // punish whatever was played last round
        let mut adv: Adversary<usize, ArmLosses> = Adversary::Adaptive(Box::new(|_, h: &[usize]| {
            let mut l = vec![0.0, 0.0];
            if let Some(&a) = h.last() {
                l[a] = 1.0;
            }
            ArmLosses(l)
        }));
        let mut rng = substream(2, Stream::Learner);
        let opts = RunOptions { record: true, ..RunOptions::default() };
        let out = run(&mut e, &mut adv, ArmComparator::new(2), &[1; 200], 200, &opts, &mut rng).unwrap();
        let tr = &out.trajectory;
        for w in tr.windows(2) {
            assert_eq!(w[1].loss, if w[1].action == w[0].action { 1.0 } else { 0.0 });
        }
    }
}
