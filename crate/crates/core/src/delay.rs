//! Delay schedules and the bookkeeping quantities derived from a realised
//! delay sequence. Rounds are 1-based; the sample of round `t` is delivered
//! in round `t + d_t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelaySchedule {
    Constant { delay: u64 },
    /// `ceil(t^alpha)`.
    PowerLaw { alpha: f64 },
    /// `d_t = t`.
    Linear,
    /// `ceil(t ln t)`, floored at 1.
    LinearLog,
    ExplicitList { delays: Vec<u64> },
    /// Uniform on `1..=max`, a pure function of `(seed, t)`.
    RandomBounded { max: u64, seed: u64 },
}

impl DelaySchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            DelaySchedule::Constant { delay: 0 } => Err(Error::Config("constant delay must be >= 1".into())),
            DelaySchedule::PowerLaw { alpha } if !(alpha.is_finite() && *alpha >= 0.0) => {
                Err(Error::Config(format!("power-law exponent must be finite and >= 0, got {alpha}")))
            }
            DelaySchedule::ExplicitList { delays } => match delays.iter().position(|&d| d == 0) {
                Some(i) => Err(Error::InvalidDelay { round: i as u64 + 1, delay: 0 }),
                None => Ok(()),
            },
            DelaySchedule::RandomBounded { max: 0, .. } => Err(Error::Config("random delay bound must be >= 1".into())),
            _ => Ok(()),
        }
    }

    /// Delays for rounds `1..=horizon`.
    pub fn realize(&self, horizon: u64) -> Result<Vec<u64>> {
        self.validate()?;
        (1..=horizon).map(|t| generate_delay(self, t)).collect()
    }
}

/// `ceil(x)` that forgives floating noise around integers, so `16^0.25`
/// gives 2 rather than 3.
fn ceil_robust(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

pub fn generate_delay(schedule: &DelaySchedule, t: u64) -> Result<u64> {
    if t == 0 {
        return Err(Error::Config("rounds are 1-based".into()));
    }
    let d = match schedule {
        DelaySchedule::Constant { delay } => *delay,
        DelaySchedule::PowerLaw { alpha } => ceil_robust((t as f64).powf(*alpha)),
        DelaySchedule::Linear => t,
        DelaySchedule::LinearLog => ceil_robust(t as f64 * (t as f64).ln()),
        DelaySchedule::ExplicitList { delays } => *delays
            .get(t as usize - 1)
            .ok_or(Error::ScheduleExhausted { round: t, len: delays.len() })?,
        DelaySchedule::RandomBounded { max, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            rng.set_stream(t);
            rng.random_range(1..=*max)
        }
    };
    match d {
        0 if matches!(schedule, DelaySchedule::ExplicitList { .. }) => Err(Error::InvalidDelay { round: t, delay: 0 }),
        0 => Ok(1),
        d => Ok(d),
    }
}

/// Rounds whose feedback has not arrived by the end of round `horizon`.
pub fn missing_set(delays: &[u64], horizon: u64) -> Vec<u64> {
    (1..=horizon)
        .filter(|&t| t + delays[t as usize - 1] > horizon)
        .collect()
}

/// `sum_t min(d_t, T - t + 1)`: how many (sample, round) pairs were missing.
pub fn effective_delay_sum(delays: &[u64], horizon: u64) -> u64 {
    (1..=horizon).map(|t| delays[t as usize - 1].min(horizon - t + 1)).sum()
}

/// Sum of the delays of samples that do arrive within the horizon.
pub fn received_delay_sum(delays: &[u64], horizon: u64) -> u64 {
    (1..=horizon)
        .map(|t| delays[t as usize - 1])
        .enumerate()
        .filter(|&(i, d)| i as u64 + 1 + d <= horizon)
        .map(|(_, d)| d)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        assert_eq!(generate_delay(&DelaySchedule::LinearLog, 10).unwrap(), 24);
        assert_eq!(generate_delay(&DelaySchedule::LinearLog, 1).unwrap(), 1);
        assert_eq!(generate_delay(&DelaySchedule::PowerLaw { alpha: 0.25 }, 16).unwrap(), 2);
        assert_eq!(generate_delay(&DelaySchedule::PowerLaw { alpha: 0.5 }, 10).unwrap(), 4);
        assert_eq!(generate_delay(&DelaySchedule::PowerLaw { alpha: 1.0 }, 37).unwrap(), 37);
        assert_eq!(generate_delay(&DelaySchedule::Linear, 5).unwrap(), 5);
    }

    #[test]
    fn explicit_list_exhaustion_is_an_error() {
        let s = DelaySchedule::ExplicitList { delays: vec![1, 2] };
        assert_eq!(generate_delay(&s, 2).unwrap(), 2);
        assert_eq!(generate_delay(&s, 3), Err(Error::ScheduleExhausted { round: 3, len: 2 }));
        assert!(DelaySchedule::ExplicitList { delays: vec![1, 0] }.validate().is_err());
    }

    #[test]
    fn random_bounded_is_a_function_of_seed_and_round() {
        let s = DelaySchedule::RandomBounded { max: 5, seed: 9 };
        let a = s.realize(200).unwrap();
        assert_eq!(a, s.realize(200).unwrap());
        assert!(a.iter().all(|&d| (1..=5).contains(&d)));
        assert_eq!(generate_delay(&s, 77).unwrap(), a[76]);
    }

    #[test]
    fn missing_and_effective_sum() {
        // T = 10, d_t = t: missing are t >= 6, D = sum min(t, 11 - t)
        let d = DelaySchedule::Linear.realize(10).unwrap();
        assert_eq!(missing_set(&d, 10), vec![6, 7, 8, 9, 10]);
        assert_eq!(effective_delay_sum(&d, 10), 1 + 2 + 3 + 4 + 5 + 5 + 4 + 3 + 2 + 1);
        assert_eq!(received_delay_sum(&d, 10), 1 + 2 + 3 + 4 + 5);
        let c = DelaySchedule::Constant { delay: 1 }.realize(10).unwrap();
        assert_eq!(missing_set(&c, 10), vec![10]);
        assert_eq!(effective_delay_sum(&c, 10), 10);
    }
}
