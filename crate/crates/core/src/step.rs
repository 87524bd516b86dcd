//! Step-size schedules.

use serde::{Deserialize, Serialize};

/// Largest step size for which the EXP3 multiplicative stability argument
/// holds (`e^-2 / 2`), shaved so that comparisons stay strict.
pub fn exp3_eta_cap() -> f64 {
    (-2.0f64).exp() / 2.0 * (1.0 - 1e-9)
}

/// `ln(max(x, e))`, at least 1.
pub fn guarded_ln(x: f64) -> f64 {
    x.max(std::f64::consts::E).ln()
}

pub fn lnln(x: f64) -> f64 {
    guarded_ln(guarded_ln(x))
}

pub fn lnlnln(x: f64) -> f64 {
    guarded_ln(lnln(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepKind {
    Fixed { eta: f64 },
    /// `scale / (t^exponent ln(t + 1))`.
    PowerLog { scale: f64, exponent: f64 },
    /// `scale / (t ln(t + 1) lnln(t + 1))`.
    LinearLogLog { scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub kind: StepKind,
    #[serde(default)]
    pub cap: Option<f64>,
}

impl StepSchedule {
    pub fn fixed(eta: f64) -> Self {
        Self { kind: StepKind::Fixed { eta }, cap: None }
    }

    pub fn power_log(scale: f64, exponent: f64) -> Self {
        Self { kind: StepKind::PowerLog { scale, exponent }, cap: None }
    }

    pub fn linear_loglog(scale: f64) -> Self {
        Self { kind: StepKind::LinearLogLog { scale }, cap: None }
    }

    /// Same schedule, clipped to the EXP3 stability cap.
    pub fn capped_for_exp3(mut self) -> Self {
        self.cap = Some(exp3_eta_cap());
        self
    }

    pub fn at(&self, t: u64) -> f64 {
        let t = t.max(1) as f64;
        let raw = match self.kind {
            StepKind::Fixed { eta } => eta,
            StepKind::PowerLog { scale, exponent } => scale / (t.powf(exponent) * (t + 1.0).ln()),
            StepKind::LinearLogLog { scale } => scale / (t * (t + 1.0).ln() * lnln(t + 1.0)),
        };
        match self.cap {
            Some(c) => raw.min(c),
            None => raw,
        }
    }

    pub fn is_anytime(&self) -> bool {
        !matches!(self.kind, StepKind::Fixed { .. })
    }
}
