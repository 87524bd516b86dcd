//! Run configuration files (TOML) and the resolution of `"auto"` tuning.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::delay::{received_delay_sum, DelaySchedule};
use crate::error::{Error, Result};
use crate::exp3::{fixed_eta, GammaMode};
use crate::fkm::{anytime_schedule, fixed_params, DelayClass};
use crate::step::{exp3_eta_cap, lnln, StepKind, StepSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SingleAgentExp3,
    SingleAgentFkm,
    WrappedExp3,
    WrappedFkm,
    ZeroSumGame,
    FiniteGameCce,
    /// FKM with linear regret but vanishing discounted regret.
    Proposition1,
    /// EXP3 with linear regret but vanishing discounted regret.
    Proposition2,
}

impl ExperimentKind {
    fn uses_exp3(self) -> bool {
        matches!(self, Self::SingleAgentExp3 | Self::WrappedExp3 | Self::FiniteGameCce | Self::Proposition2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub count: u64,
    pub root: u64,
}

/// A tunable parameter: a number, an explicit schedule, or a named rule
/// (`"auto"`, `"doubling"`, or a delay class such as `"t^1/4"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tuning {
    Value(f64),
    Schedule(StepSchedule),
    Rule(String),
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning::Rule("auto".into())
    }
}

impl Tuning {
    fn is_auto(&self) -> bool {
        matches!(self, Tuning::Rule(r) if r == "auto")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arms: Option<usize>,
    /// Defaults to `"auto"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<Tuning>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Tuning>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaMode>,
    /// Clip EXP3 step sizes to the stability cap instead of rejecting them.
    pub auto_clamp: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub body: Option<ConvexBody>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    /// Radius scale for the wrapped FKM.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdversarySpec {
    /// The same arm losses every round.
    FixedLosses { losses: Vec<f64> },
    /// Independent Bernoulli arm losses.
    Bernoulli { means: Vec<f64>, seed: u64 },
    /// Zero losses for the first half; afterwards arm 0 costs 0 and the rest 1.
    LateSwitch,
    Quadratic { scale: f64, center: Vec<f64>, offset: f64 },
    Linear { grad: Vec<f64>, offset: f64 },
    /// Zero losses for the first half, then `|x - 1/sqrt(n)|^2 / (diam + 1)^2`.
    LateSwitchQuadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    MatchingPennies,
    Chicken,
    /// Zero-sum: the row player pays `cost[i][j]`.
    Matrix { cost: Vec<Vec<f64>> },
    /// General-sum utilities of the row and column players.
    Bimatrix { row: Vec<Vec<f64>>, col: Vec<Vec<f64>> },
    /// Zero-sum over two convex bodies; see [`crate::game::QuadraticSaddle`].
    QuadraticSaddle {
        offset: f64,
        alpha: f64,
        beta: f64,
        lin_y: Vec<f64>,
        lin_z: Vec<f64>,
        coupling: Vec<Vec<f64>>,
        y_body: ConvexBody,
        z_body: ConvexBody,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    pub horizon: u64,
    pub seeds: Seeds,
    pub delay: DelaySchedule,
    /// Column player's delays in two-player games; defaults to `delay`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column_delay: Option<DelaySchedule>,
    #[serde(default)]
    pub algorithm: AlgorithmSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game: Option<GameSpec>,
    /// Prefix lengths reported in the summary; defaults to powers of two
    /// from 1024 plus the horizon.
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    #[serde(default = "yes")]
    pub trajectories: bool,
    /// Keep only checkpoint rows in trajectory files.
    #[serde(default)]
    pub thin: bool,
    pub output: PathBuf,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn checkpoint_grid(&self) -> Vec<u64> {
        let mut c: Vec<u64> = if self.checkpoints.is_empty() {
            (10..64).map(|e| 1u64 << e).take_while(|&t| t < self.horizon).collect()
        } else {
            self.checkpoints.iter().copied().filter(|&t| t >= 1 && t <= self.horizon).collect()
        };
        c.push(self.horizon);
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn column_delay(&self) -> &DelaySchedule {
        self.column_delay.as_ref().unwrap_or(&self.delay)
    }
}

/// Concrete parameters derived from a config.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    /// The config with every rule replaced by what it resolved to.
    pub config: RunConfig,
    pub arms: usize,
    pub eta: Option<StepSchedule>,
    pub delta: Option<f64>,
    pub gamma: GammaMode,
    pub body: Option<ConvexBody>,
    pub lipschitz: f64,
    pub delta0: f64,
    pub delays: Vec<u64>,
    pub column_delays: Vec<u64>,
}

fn class_for(schedule: &DelaySchedule) -> Result<DelayClass> {
    Ok(match schedule {
        DelaySchedule::Constant { .. } | DelaySchedule::RandomBounded { .. } => DelayClass::QuarterPower,
        DelaySchedule::PowerLaw { alpha } if *alpha <= 0.25 => DelayClass::QuarterPower,
        DelaySchedule::PowerLaw { alpha } if *alpha <= 0.75 => DelayClass::ThreeQuarterPower,
        DelaySchedule::PowerLaw { alpha } if *alpha <= 1.0 => DelayClass::Linear,
        DelaySchedule::Linear => DelayClass::Linear,
        DelaySchedule::LinearLog => DelayClass::LinearLog,
        other => return Err(Error::Config(format!("no anytime step size for delays {other:?}; set algorithm.eta"))),
    })
}

fn rule_class(rule: &str, delay: &DelaySchedule) -> Result<DelayClass> {
    if rule == "auto" {
        class_for(delay)
    } else {
        rule.parse()
    }
}

/// Checks an EXP3 schedule against the stability cap, clipping it when
/// `auto_clamp` is set.
fn exp3_schedule(mut s: StepSchedule, auto_clamp: bool) -> Result<StepSchedule> {
    let cap = exp3_eta_cap();
    let first = s.at(1);
    if first.is_nan() || first <= 0.0 {
        return Err(Error::Config(format!("step size must be positive, got {first}")));
    }
    if first >= cap && s.cap.is_none_or(|c| c >= cap) {
        if !auto_clamp {
            return Err(Error::Config(format!(
                "EXP3 step size {first} at round 1 is not below e^-2/2 = {cap:.6}; set algorithm.auto_clamp = true to clip it"
            )));
        }
        s = match s.kind {
            StepKind::Fixed { eta } => StepSchedule::fixed(eta.min(cap)),
            _ => s.capped_for_exp3(),
        };
    }
    Ok(s)
}

pub fn resolve(config: &RunConfig) -> Result<Resolved> {
    use ExperimentKind as K;
    if config.horizon == 0 {
        return Err(Error::Config("horizon must be positive".into()));
    }
    if config.seeds.count == 0 {
        return Err(Error::Config("seed count must be positive".into()));
    }
    let t = config.horizon;
    let delays = config.delay.realize(t)?;
    let column_delays = config.column_delay().realize(t)?;
    let alg = &config.algorithm;
    let (alg_eta, alg_delta) = (alg.eta.clone().unwrap_or_default(), alg.delta.clone().unwrap_or_default());
    let mut out = config.clone();

    let game_arms = match (&config.kind, &config.game) {
        (K::ZeroSumGame | K::FiniteGameCce, None) => return Err(Error::Config("game experiments need a [game] table".into())),
        (K::FiniteGameCce, Some(GameSpec::Matrix { .. } | GameSpec::QuadraticSaddle { .. })) => {
            return Err(Error::Config("finite_game_cce needs a general-sum finite game".into()))
        }
        (K::ZeroSumGame, Some(GameSpec::Chicken | GameSpec::Bimatrix { .. })) => {
            return Err(Error::Config("zero_sum_game needs matching_pennies, matrix or quadratic_saddle".into()))
        }
        (_, Some(GameSpec::MatchingPennies | GameSpec::Chicken)) => Some(2),
        (_, Some(GameSpec::Matrix { cost })) => Some(cost.len().max(cost.first().map_or(0, Vec::len))),
        (_, Some(GameSpec::Bimatrix { row, .. })) => Some(row.len().max(row.first().map_or(0, Vec::len))),
        _ => None,
    };
    let convex_game = matches!(config.game, Some(GameSpec::QuadraticSaddle { .. }));
    let exp3 = config.kind.uses_exp3() || (config.kind == K::ZeroSumGame && !convex_game);

    let arms = match (alg.arms, game_arms) {
        (_, Some(k)) => k,
        (Some(k), None) => k,
        (None, None) if exp3 => match &config.adversary {
            Some(AdversarySpec::FixedLosses { losses }) => losses.len(),
            Some(AdversarySpec::Bernoulli { means, .. }) => means.len(),
            _ => return Err(Error::Config("algorithm.arms is required".into())),
        },
        _ => 0,
    };
    if exp3 && arms < 2 {
        return Err(Error::Config(format!("EXP3 needs at least two arms, got {arms}")));
    }
    out.algorithm.arms = exp3.then_some(arms);

    let gamma = alg.gamma.unwrap_or(match config.kind {
        K::ZeroSumGame | K::FiniteGameCce => GammaMode::EqualEta,
        _ => GammaMode::Zero,
    });
    if exp3 {
        out.algorithm.gamma = Some(gamma);
    }

    let body = if exp3 {
        None
    } else {
        let b = match (&config.game, &alg.body) {
            (Some(GameSpec::QuadraticSaddle { y_body, .. }), _) => y_body.clone(),
            (_, Some(b)) => b.clone(),
            (_, None) if matches!(config.kind, K::Proposition1) => ConvexBody::ball(1, 1.0)?,
            _ => return Err(Error::Config("algorithm.body is required for convex learners".into())),
        };
        Some(b.validated()?)
    };
    out.algorithm.body = if convex_game { None } else { body.clone() };
    let n = body.as_ref().map_or(0, ConvexBody::dim);
    let diameter = body.as_ref().map_or(0.0, ConvexBody::diameter);

    let lipschitz = match (alg.lipschitz, config.kind) {
        (Some(l), _) => l,
        // gradient bound of the late-switch quadratic on the body
        (None, K::Proposition1) => {
            let reach = diameter / 2.0 + 1.0;
            2.0 * reach / (diameter + 1.0).powi(2)
        }
        (None, K::WrappedFkm | K::SingleAgentFkm) => match &config.adversary {
            Some(AdversarySpec::Quadratic { scale, center, .. }) => {
                2.0 * scale * (diameter / 2.0 + crate::body::norm(center))
            }
            Some(AdversarySpec::Linear { grad, .. }) => crate::body::norm(grad),
            _ => return Err(Error::Config("algorithm.lipschitz is required".into())),
        },
        (None, _) => 1.0,
    };
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::Config(format!("lipschitz constant must be positive, got {lipschitz}")));
    }
    if !exp3 {
        out.algorithm.lipschitz = Some(lipschitz);
    }

    let mut delta0 = 0.0;
    let (eta, delta) = match config.kind {
        K::SingleAgentExp3 => {
            let s = match &alg_eta {
                Tuning::Value(v) => StepSchedule::fixed(*v),
                Tuning::Schedule(s) => s.clone(),
                Tuning::Rule(r) if r == "auto" => StepSchedule::fixed(fixed_eta(arms, t, received_delay_sum(&delays, t))),
                Tuning::Rule(r) => rule_class(r, &config.delay)?.step_schedule(),
            };
            (Some(exp3_schedule(s, alg.auto_clamp)?), None)
        }
        K::SingleAgentFkm => {
            let (auto_eta, auto_delta) = fixed_params(n, t, received_delay_sum(&delays, t), diameter);
            let (s, class_delta) = match &alg_eta {
                Tuning::Value(v) => (StepSchedule::fixed(*v), None),
                Tuning::Schedule(s) => (s.clone(), None),
                Tuning::Rule(r) if r == "auto" => (StepSchedule::fixed(auto_eta), Some(auto_delta)),
                Tuning::Rule(r) => {
                    let (s, d) = anytime_schedule(rule_class(r, &config.delay)?, t);
                    (s, Some(d))
                }
            };
            let d = match &alg_delta {
                Tuning::Value(v) => *v,
                Tuning::Rule(r) if r == "auto" => class_delta.unwrap_or(auto_delta),
                other => return Err(Error::Config(format!("algorithm.delta must be a number or \"auto\", got {other:?}"))),
            };
            (Some(s), Some(d))
        }
        K::WrappedExp3 | K::WrappedFkm => {
            for (name, v) in [("eta", &alg_eta), ("delta", &alg_delta)] {
                if !v.is_auto() && *v != Tuning::Rule("doubling".into()) {
                    return Err(Error::Config(format!("wrapped learners tune {name} themselves; leave it \"auto\"")));
                }
            }
            if config.kind == K::WrappedFkm {
                delta0 = alg.delta0.unwrap_or(1.0);
                out.algorithm.delta0 = Some(delta0);
            }
            out.algorithm.eta = Some(Tuning::Rule("doubling".into()));
            out.algorithm.delta = (config.kind == K::WrappedFkm).then(|| Tuning::Rule("doubling".into()));
            (None, None)
        }
        K::ZeroSumGame | K::FiniteGameCce | K::Proposition2 => {
            let (s, d) = match &alg_eta {
                Tuning::Value(v) => (StepSchedule::fixed(*v), None),
                Tuning::Schedule(s) => (s.clone(), None),
                Tuning::Rule(r) => {
                    let class = if config.kind == K::Proposition2 && r == "auto" {
                        DelayClass::Linear
                    } else {
                        let slower = match (class_for(&config.delay), class_for(config.column_delay())) {
                            (Ok(a), Ok(b)) => Ok(a.max(b)),
                            (Err(e), _) | (_, Err(e)) => Err(e),
                        };
                        if r == "auto" { slower? } else { r.parse()? }
                    };
                    let (s, d) = anytime_schedule(class, t);
                    (s, Some(d))
                }
            };
            if exp3 {
                (Some(exp3_schedule(s, alg.auto_clamp)?), None)
            } else {
                let d = match &alg_delta {
                    Tuning::Value(v) => *v,
                    Tuning::Rule(r) if r == "auto" => d.ok_or_else(|| Error::Config("algorithm.delta is required".into()))?,
                    other => return Err(Error::Config(format!("algorithm.delta must be a number or \"auto\", got {other:?}"))),
                };
                (Some(s), Some(d))
            }
        }
        K::Proposition1 => {
            let s = match &alg_eta {
                Tuning::Rule(r) if r == "auto" => DelayClass::Linear.step_schedule(),
                Tuning::Value(v) => StepSchedule::fixed(*v),
                Tuning::Schedule(s) => s.clone(),
                Tuning::Rule(r) => r.parse::<DelayClass>()?.step_schedule(),
            };
            let d = match &alg_delta {
                Tuning::Value(v) => *v,
                Tuning::Rule(r) if r == "auto" => lnln(t as f64).powf(-1.0 / 3.0) / lipschitz,
                other => return Err(Error::Config(format!("algorithm.delta must be a number or \"auto\", got {other:?}"))),
            };
            (Some(s), Some(crate::fkm::clamp_delta(d)))
        }
    };
    if let Some(s) = &eta {
        out.algorithm.eta = Some(match s.kind {
            StepKind::Fixed { eta } if s.cap.is_none() => Tuning::Value(eta),
            _ => Tuning::Schedule(s.clone()),
        });
    }
    if let Some(d) = delta {
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::Config(format!("sampling radius must lie in (0, 1), got {d}")));
        }
        out.algorithm.delta = Some(Tuning::Value(d));
    } else if exp3 {
        out.algorithm.delta = None;
    }

    match (config.kind, &config.adversary) {
        (K::SingleAgentExp3 | K::WrappedExp3, Some(AdversarySpec::FixedLosses { losses })) if losses.len() != arms => {
            return Err(Error::Config(format!("{} arm losses for {arms} arms", losses.len())))
        }
        (K::SingleAgentExp3 | K::WrappedExp3, Some(AdversarySpec::Bernoulli { means, .. })) if means.len() != arms => {
            return Err(Error::Config(format!("{} arm means for {arms} arms", means.len())))
        }
        (K::SingleAgentExp3 | K::WrappedExp3, Some(AdversarySpec::FixedLosses { .. } | AdversarySpec::Bernoulli { .. } | AdversarySpec::LateSwitch)) => {}
        (K::SingleAgentFkm | K::WrappedFkm, Some(AdversarySpec::Quadratic { center: v, .. } | AdversarySpec::Linear { grad: v, .. })) => {
            if v.len() != n {
                return Err(Error::Config(format!("adversary vector has length {} but the body has dimension {n}", v.len())));
            }
        }
        (K::SingleAgentFkm | K::WrappedFkm, Some(AdversarySpec::LateSwitchQuadratic)) => {}
        (K::Proposition1, None | Some(AdversarySpec::LateSwitchQuadratic)) => out.adversary = Some(AdversarySpec::LateSwitchQuadratic),
        (K::Proposition2, None | Some(AdversarySpec::LateSwitch)) => out.adversary = Some(AdversarySpec::LateSwitch),
        (K::ZeroSumGame | K::FiniteGameCce, None) => {}
        (kind, adv) => return Err(Error::Config(format!("adversary {adv:?} does not fit experiment {kind:?}"))),
    }
    out.checkpoints = config.checkpoint_grid();

    Ok(Resolved {
        config: out,
        arms,
        eta,
        delta,
        gamma,
        body,
        lipschitz,
        delta0,
        delays,
        column_delays,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMOKE: &str = r#"
kind = "single_agent_exp3"
horizon = 1000
output = "out/smoke"

[seeds]
count = 3
root = 7

[delay]
kind = "constant"
delay = 1

[algorithm]
arms = 2

[adversary]
kind = "fixed_losses"
losses = [0.0, 1.0]
"#;

    #[test]
    fn parses_and_resolves_auto() {
        let c = RunConfig::from_toml(SMOKE).unwrap();
        assert_eq!(c.algorithm.eta, None);
        let r = resolve(&c).unwrap();
        let expected = fixed_eta(2, 1000, 999);
        assert_eq!(r.config.algorithm.eta, Some(Tuning::Value(expected)));
        assert_eq!(r.config.checkpoints, vec![1000]);
        // resolving an explicit config changes nothing
        assert_eq!(resolve(&r.config).unwrap().config, r.config);
    }

    #[test]
    fn large_step_needs_clamp_flag() {
        let text = SMOKE.replace("arms = 2", "arms = 2\neta = 0.2");
        let c = RunConfig::from_toml(&text).unwrap();
        assert!(matches!(resolve(&c), Err(Error::Config(_))));
        let text = text.replace("eta = 0.2", "eta = 0.2\nauto_clamp = true");
        let r = resolve(&RunConfig::from_toml(&text).unwrap()).unwrap();
        assert!(r.eta.unwrap().at(1) < exp3_eta_cap() * (1.0 + 1e-12));
    }

    #[test]
    fn rejects_unknown_fields_and_bad_shapes() {
        assert!(RunConfig::from_toml(&SMOKE.replace("arms = 2", "arms = 2\nbogus = 1")).is_err());
        let c = RunConfig::from_toml(&SMOKE.replace("arms = 2", "arms = 3")).unwrap();
        assert!(resolve(&c).is_err());
    }

    #[test]
    fn game_defaults_follow_the_delay_class() {
        let text = r#"
kind = "finite_game_cce"
horizon = 5000
output = "out/g"
[seeds]
count = 2
root = 1
[delay]
kind = "power_law"
alpha = 0.25
[algorithm]
auto_clamp = true
[game]
kind = "chicken"
"#;
        let r = resolve(&RunConfig::from_toml(text).unwrap()).unwrap();
        let s = r.eta.unwrap();
        assert_eq!(s.kind, StepKind::PowerLog { scale: 1.0, exponent: 0.625 });
        assert!(s.cap.is_some());
        assert_eq!(r.gamma, GammaMode::EqualEta);
        let again = RunConfig::from_toml(&r.config.to_toml().unwrap()).unwrap();
        assert_eq!(again, r.config);
        // without the clamp flag the first step is too large for EXP3
        let bad = RunConfig::from_toml(&text.replace("auto_clamp = true", "")).unwrap();
        assert!(matches!(resolve(&bad), Err(Error::Config(_))));
    }
}
