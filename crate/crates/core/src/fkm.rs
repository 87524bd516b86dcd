//! FKM bandit convex optimisation with delayed feedback: play a random
//! point on a small sphere around the iterate, turn the returned loss into
//! a one-point gradient estimate, and take projected steps on the shrunk
//! body once the sample arrives.

use std::collections::HashMap;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::body::{norm, ConvexBody};
use crate::error::{Error, Result};
use crate::learner::{DelayedLearner, SimRng, UpdateReport};
use crate::queue::FeedbackEvent;
use crate::step::{lnln, lnlnln, StepSchedule};

pub const DELTA_MIN: f64 = 1e-6;
pub const DELTA_MAX: f64 = 1.0 - 1e-6;

pub fn clamp_delta(delta: f64) -> f64 {
    delta.clamp(DELTA_MIN, DELTA_MAX)
}

/// Uniform draw from the unit sphere in `R^n` by normalising a Gaussian.
pub fn sample_unit_sphere(n: usize, rng: &mut SimRng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let r = norm(&v);
        if r > 1e-300 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// One-point estimate `(n / delta) * loss * u`.
pub fn gradient_estimate(loss: f64, u: &[f64], delta: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&loss) {
        return Err(Error::CostOutOfRange { round: 0, value: loss });
    }
    let scale = u.len() as f64 / delta * loss;
    Ok(u.iter().map(|v| scale * v).collect())
}

#[derive(Debug, Clone)]
struct Perturbation {
    u: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Fkm {
    body: ConvexBody,
    x: Vec<f64>,
    delta: f64,
    schedule: StepSchedule,
    log: HashMap<u64, Perturbation>,
    last_u: Vec<f64>,
}

impl Fkm {
    pub fn new(body: ConvexBody, delta: f64, schedule: StepSchedule) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("FKM needs 0 < delta < 1, got {delta}")));
        }
        let n = body.dim();
        Ok(Self { body, x: vec![0.0; n], delta, schedule, log: HashMap::new(), last_u: vec![0.0; n] })
    }

    pub fn iterate(&self) -> &[f64] {
        &self.x
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn schedule(&self) -> &StepSchedule {
        &self.schedule
    }

    /// Sphere direction used in the most recent `act`.
    pub fn last_perturbation(&self) -> &[f64] {
        &self.last_u
    }

    /// Play `x + delta u` for a given direction.
    pub fn act_with(&mut self, round: u64, u: Vec<f64>) -> Vec<f64> {
        let a = self.x.iter().zip(&u).map(|(x, u)| x + self.delta * u).collect();
        self.last_u.clone_from(&u);
        self.log.insert(round, Perturbation { u });
        a
    }
}

impl DelayedLearner for Fkm {
    type Action = Vec<f64>;

    fn act(&mut self, round: u64, rng: &mut SimRng) -> Vec<f64> {
        let u = sample_unit_sphere(self.body.dim(), rng);
        self.act_with(round, u)
    }

    fn update(&mut self, batch: &[FeedbackEvent<Vec<f64>>]) -> Result<UpdateReport> {
        for event in batch {
            let p = self.log.remove(&event.origin).ok_or(Error::UnknownOrigin(event.origin))?;
            let g = gradient_estimate(event.loss, &p.u, self.delta)
                .map_err(|_| Error::CostOutOfRange { round: event.origin, value: event.loss })?;
            let eta = self.schedule.at(event.origin);
            for (x, g) in self.x.iter_mut().zip(&g) {
                *x -= eta * g;
            }
            self.body.project_shrunk(&mut self.x, self.delta);
        }
        Ok(UpdateReport { applied: batch.len(), ..UpdateReport::default() })
    }

    fn eta(&self, round: u64) -> f64 {
        self.schedule.at(round)
    }
}

/// Step size and sampling radius tuned for a known horizon and delay sum.
pub fn fixed_params(n: usize, horizon: u64, received_delay_sum: u64, diameter: f64) -> (f64, f64) {
    let (n, t, d) = (n as f64, horizon as f64, received_delay_sum as f64);
    let no_delay = t.powf(-0.75) / n;
    let with_delay = if d > 0.0 { t.powf(-1.0 / 3.0) * d.powf(-1.0 / 3.0) / n.sqrt() } else { f64::INFINITY };
    let eta = diameter * no_delay.min(with_delay);
    let delta = t.powf(-0.25).max(t.powf(-2.0 / 3.0) * d.powf(1.0 / 3.0));
    (eta, clamp_delta(delta))
}

/// Right-hand side of the expected-regret bound for fixed parameters:
/// `|M| + ((3 + |K|) delta L + eta n^2 / (2 delta^2)) (T - |M|) + |K|^2 / (2 eta)
///  + 2 L n (eta / delta) sum_{t not in M} d_t`.
#[allow(clippy::too_many_arguments)]
pub fn regret_bound(
    n: usize,
    horizon: u64,
    diameter: f64,
    lipschitz: f64,
    eta: f64,
    delta: f64,
    missing: u64,
    received_delay_sum: u64,
) -> f64 {
    let n = n as f64;
    let m = missing as f64;
    m + ((3.0 + diameter) * delta * lipschitz + 0.5 * eta * n * n / (delta * delta)) * (horizon as f64 - m)
        + diameter * diameter / (2.0 * eta)
        + 2.0 * lipschitz * n * eta / delta * received_delay_sum as f64
}

/// Delay growth classes with step sizes that keep the discounted regret
/// vanishing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayClass {
    /// `d_t = O(t^{1/4})`
    QuarterPower,
    /// `d_t = O(t^{3/4})`
    ThreeQuarterPower,
    /// `d_t = O(t)`
    Linear,
    /// `d_t = O(t log t)`
    LinearLog,
}

impl std::str::FromStr for DelayClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t^1/4" | "quarter_power" => Ok(Self::QuarterPower),
            "t^3/4" | "three_quarter_power" => Ok(Self::ThreeQuarterPower),
            "t" | "linear" => Ok(Self::Linear),
            "tlogt" | "t log t" | "linear_log" => Ok(Self::LinearLog),
            other => Err(Error::Config(format!("unknown delay class {other:?}"))),
        }
    }
}

impl DelayClass {
    pub fn step_schedule(self) -> StepSchedule {
        match self {
            Self::QuarterPower => StepSchedule::power_log(1.0, 0.625),
            Self::ThreeQuarterPower => StepSchedule::power_log(1.0, 0.875),
            Self::Linear => StepSchedule::power_log(1.0, 1.0),
            Self::LinearLog => StepSchedule::linear_loglog(1.0),
        }
    }
}

/// Anytime step sizes and the horizon-dependent radius for a delay class.
pub fn anytime_schedule(class: DelayClass, horizon: u64) -> (StepSchedule, f64) {
    let t = horizon as f64;
    let delta = match class {
        DelayClass::QuarterPower => t.powf(-3.0 / 16.0),
        DelayClass::ThreeQuarterPower => t.powf(-1.0 / 16.0),
        DelayClass::Linear => lnln(t).powf(-1.0 / 3.0),
        DelayClass::LinearLog => lnlnln(t).powf(-1.0 / 3.0),
    };
    (class.step_schedule(), clamp_delta(delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Stream};

    fn ev(origin: u64, loss: f64) -> FeedbackEvent<Vec<f64>> {
        FeedbackEvent { origin, arrival: origin + 1, loss, action: vec![] }
    }

    #[test]
    fn sphere_draws() {
        let mut rng = substream(11, Stream::Learner);
        let plus = (0..100_000).filter(|_| sample_unit_sphere(1, &mut rng)[0] > 0.0).count();
        assert!((49_000..=51_000).contains(&plus));
        let n = 100_000;
        let mut mean = [0.0; 3];
        for _ in 0..n {
            let u = sample_unit_sphere(3, &mut rng);
            assert!((norm(&u) - 1.0).abs() < 1e-12);
            mean.iter_mut().zip(&u).for_each(|(m, v)| *m += v / n as f64);
        }
        // each coordinate has variance 1/3
        let se = (1.0 / 3.0 / n as f64).sqrt();
        assert!(mean.iter().all(|m| m.abs() < 4.0 * se), "{mean:?}");
    }

    #[test]
    fn gradient_estimates() {
        assert_eq!(gradient_estimate(0.0, &[0.6, 0.8], 0.5).unwrap(), vec![0.0, 0.0]);
        assert_eq!(gradient_estimate(1.0, &[1.0, 0.0], 0.5).unwrap(), vec![4.0, 0.0]);
        let g = gradient_estimate(0.3, &[0.6, 0.8], 0.25).unwrap();
        assert!((norm(&g) - 8.0 * 0.3).abs() < 1e-12);
        assert!(gradient_estimate(1.5, &[1.0], 0.5).is_err());
    }

    #[test]
    fn projection_examples() {
        let mut x = vec![2.0, 0.0];
        ConvexBody::ball(2, 1.0).unwrap().project_shrunk(&mut x, 0.2);
        assert!((x[0] - 0.8).abs() < 1e-15 && x[1] == 0.0);
        let mut y = vec![0.7, -3.0];
        ConvexBody::cube(2, 1.0).unwrap().project_shrunk(&mut y, 0.5);
        assert_eq!(y, vec![0.5, -0.5]);
    }

    #[test]
    fn act_is_affine_in_direction() {
        let mut f = Fkm::new(ConvexBody::ball(2, 1.0).unwrap(), 0.3, StepSchedule::fixed(0.1)).unwrap();
        assert_eq!(f.act_with(1, vec![0.0, 1.0]), vec![0.0, 0.3]);
    }

    #[test]
    fn single_update_hand_value() {
        let mut f = Fkm::new(ConvexBody::ball(1, 1.0).unwrap(), 0.5, StepSchedule::fixed(0.1)).unwrap();
        f.act_with(1, vec![1.0]);
        f.update(&[]).unwrap();
        assert_eq!(f.iterate(), &[0.0]);
        f.update(&[ev(1, 0.5)]).unwrap();
        assert!((f.iterate()[0] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn batch_is_applied_in_origin_order() {
        // origin 1: loss 1, u = -1 pushes x up by 0.5 * 2 = 1, clipped to 0.5;
        // origin 2: loss 0.5, u = +1 pulls it back by 0.5 * 1 to 0.0.
        // The reverse order would end at 0.5.
        let mut f = Fkm::new(ConvexBody::ball(1, 1.0).unwrap(), 0.5, StepSchedule::fixed(0.5)).unwrap();
        f.act_with(1, vec![-1.0]);
        f.act_with(2, vec![1.0]);
        f.update(&[ev(1, 1.0), ev(2, 0.5)]).unwrap();
        assert!(f.iterate()[0].abs() < 1e-15);

        let mut r = Fkm::new(ConvexBody::ball(1, 1.0).unwrap(), 0.5, StepSchedule::fixed(0.5)).unwrap();
        r.act_with(1, vec![-1.0]);
        r.act_with(2, vec![1.0]);
        r.update(&[ev(2, 0.5), ev(1, 1.0)]).unwrap();
        assert!((r.iterate()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn missing_perturbation_is_an_error() {
        let mut f = Fkm::new(ConvexBody::ball(1, 1.0).unwrap(), 0.5, StepSchedule::fixed(0.1)).unwrap();
        assert_eq!(f.update(&[ev(3, 0.5)]), Err(Error::UnknownOrigin(3)));
        assert!(Fkm::new(ConvexBody::ball(1, 1.0).unwrap(), 1.0, StepSchedule::fixed(0.1)).is_err());
    }

    #[test]
    fn tuned_parameters() {
        let (eta, delta) = fixed_params(3, 10_000, 0, 2.0);
        assert!((eta - 2.0 / (3.0 * 1000.0)).abs() < 1e-15);
        assert!((delta - 0.1).abs() < 1e-15);

        // n = 2, T = 1e4, sum d = 1e5: branches 5e-4 and 7.07e-4
        let (eta, delta) = fixed_params(2, 10_000, 100_000, 2.0);
        assert!((eta - 1e-3).abs() < 1e-15);
        assert!((delta - 0.1).abs() < 1e-12);
        let (eta, _) = fixed_params(2, 10_000, 1_000_000, 2.0);
        let branch = (1e4f64).powf(-1.0 / 3.0) * (1e6f64).powf(-1.0 / 3.0) / 2f64.sqrt();
        assert!((eta - 2.0 * branch).abs() < 1e-15);

        assert_eq!(fixed_params(2, 1, 0, 2.0).1, DELTA_MAX);
    }

    #[test]
    fn table2_values() {
        let (s, d) = anytime_schedule(DelayClass::QuarterPower, 65_536);
        assert!((d - 65_536f64.powf(-3.0 / 16.0)).abs() < 1e-15);
        assert!((s.at(8) - 1.0 / (8f64.powf(0.625) * 9f64.ln())).abs() < 1e-15);
        let (s, _) = anytime_schedule(DelayClass::LinearLog, 100);
        let t = 50.0f64;
        assert!((s.at(50) - 1.0 / (t * 51f64.ln() * 51f64.ln().ln())).abs() < 1e-15);
        let (_, d) = anytime_schedule(DelayClass::Linear, 1_000_000);
        assert!((d - 0.7249).abs() < 1e-4);
        assert_eq!(anytime_schedule(DelayClass::ThreeQuarterPower, 1).1, DELTA_MAX);
        assert!("t^5".parse::<DelayClass>().is_err());
    }
}
