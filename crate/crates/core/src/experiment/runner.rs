//! Executes a resolved configuration over its seeds.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::body::ConvexBody;
use crate::cost::{Adversary, ArmComparator, ArmLosses, Comparator, ConvexComparator, ConvexLoss};
use crate::delay::effective_delay_sum;
use crate::doubling::{wrapped_exp3, wrapped_fkm, EpochRecord};
use crate::error::{Error, Result};
use crate::exp3::{self, Exp3};
use crate::experiment::artifacts::{self, Table};
use crate::experiment::config::{resolve, AdversarySpec, ExperimentKind, GameSpec, Resolved, RunConfig};
use crate::experiment::{fit_regret_exponent, mean_and_se, worker_pool};
use crate::fkm::{self, Fkm};
use crate::game::{
    self, cce_gap, game_value_bilinear, ne_gap_zero_sum, ConvexConcaveGame, FiniteGame, JointOutcome,
    QuadraticSaddle, SaddleOutcome, ZeroSumGame,
};
use crate::learner::DelayedLearner;
use crate::rng::{replicate_seed, substream, Stream};
use crate::sim::{run, RoundRecord, RunOptions, RunOutcome};
use crate::step::StepKind;

/// One summary row per checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub t: u64,
    pub mean_regret: f64,
    pub std_err: f64,
    pub mean_expected_regret: Option<f64>,
    /// Known-parameter regret bound evaluated on the prefix's realised
    /// missing count, delay sum and discards.
    pub bound: Option<f64>,
    pub discounted_ratio: f64,
    pub missing: u64,
    pub received_delay_sum: u64,
    pub discarded: u64,
}

/// Equilibrium gaps of the discounted ergodic play at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub t: u64,
    /// Over played actions: the cce gap of the seed-averaged distribution
    /// for general games, the seed-mean exploitability for zero-sum games.
    pub gap: f64,
    pub gap_std_err: f64,
    /// Same, built from the players' mixed strategies.
    pub gap_mixed: Option<f64>,
    /// Seed-mean game value at the averaged strategies (zero-sum only).
    pub value: Option<f64>,
    /// Seed-mean of the largest per-player discounted-regret ratio.
    pub max_ratio: Option<f64>,
    pub max_ratio_std_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedRecord {
    pub index: u64,
    pub seed: u64,
    pub regret: f64,
    pub expected_regret: Option<f64>,
    pub missing: u64,
    pub discarded: u64,
    pub restarts: u32,
    pub violations: u64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub resolved: Resolved,
    pub effective_delay_sum: u64,
    pub summary: Vec<SummaryRow>,
    pub gaps: Vec<GapRow>,
    pub seeds: Vec<SeedRecord>,
    /// Super-epochs of the first replicate (wrapped learners only); the
    /// layout depends on the delays alone, so every replicate shares it.
    pub super_epochs: Vec<EpochRecord>,
    pub exponent: Option<f64>,
    /// Per-seed trajectory tables.
    pub trajectories: Vec<Table>,
}

trait Render {
    fn render(&self) -> String;
}

impl Render for usize {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Render for Vec<f64> {
    fn render(&self) -> String {
        self.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
    }
}

/// `(|M|, sum of received delays, discarded, kept delay sum)` of the
/// prefix `1..=end`.
pub fn prefix_counts(delays: &[u64], end: u64, accept: impl Fn(u64, u64) -> bool) -> (u64, u64, u64, u64) {
    let (mut missing, mut received, mut discarded, mut kept) = (0, 0, 0, 0);
    for (i, &d) in delays[..end as usize].iter().enumerate() {
        let s = i as u64 + 1;
        if s + d > end {
            missing += 1;
        } else {
            received += d;
            if accept(s, d) {
                kept += d;
            } else {
                discarded += 1;
            }
        }
    }
    (missing, received, discarded, kept)
}

fn arm_adversary(spec: &AdversarySpec, arms: usize, horizon: u64) -> Result<Adversary<usize, ArmLosses>> {
    Ok(match spec.clone() {
        AdversarySpec::FixedLosses { losses } => Adversary::Oblivious(Box::new(move |_| ArmLosses(losses.clone()))),
        AdversarySpec::Bernoulli { means, seed } => {
            use rand::Rng;
            let mut rng = substream(seed, Stream::Adversary);
            Adversary::Oblivious(Box::new(move |_| {
                ArmLosses(means.iter().map(|&m| if rng.random::<f64>() < m { 1.0 } else { 0.0 }).collect())
            }))
        }
        AdversarySpec::LateSwitch => {
            let half = horizon / 2;
            Adversary::Oblivious(Box::new(move |t| {
                ArmLosses((0..arms).map(|i| if t <= half || i == 0 { 0.0 } else { 1.0 }).collect())
            }))
        }
        other => return Err(Error::Config(format!("{other:?} is not a bandit adversary"))),
    })
}

fn convex_adversary(spec: &AdversarySpec, body: &ConvexBody, horizon: u64) -> Result<Adversary<Vec<f64>, ConvexLoss>> {
    Ok(match spec.clone() {
        AdversarySpec::Quadratic { scale, center, offset } => {
            let l = ConvexLoss::Quadratic { scale, center, offset };
            Adversary::Oblivious(Box::new(move |_| l.clone()))
        }
        AdversarySpec::Linear { grad, offset } => {
            let l = ConvexLoss::Linear { grad, offset };
            Adversary::Oblivious(Box::new(move |_| l.clone()))
        }
        AdversarySpec::LateSwitchQuadratic => {
            let n = body.dim();
            let zero = ConvexLoss::Linear { grad: vec![0.0; n], offset: 0.0 };
            let late = ConvexLoss::Quadratic {
                scale: 1.0 / (body.diameter() + 1.0).powi(2),
                center: vec![1.0 / (n as f64).sqrt(); n],
                offset: 0.0,
            };
            let half = horizon / 2;
            Adversary::Oblivious(Box::new(move |t| if t <= half { zero.clone() } else { late.clone() }))
        }
        other => return Err(Error::Config(format!("{other:?} is not a convex adversary"))),
    })
}

fn seed_of(res: &Resolved, index: u64) -> u64 {
    replicate_seed(res.config.seeds.root, index)
}

fn trajectory_table<A: Render>(index: u64, rows: &[RoundRecord<A>], keep: impl Fn(u64) -> bool) -> Table {
    let wrapped = rows.first().is_some_and(|r| r.telemetry.is_some());
    let mut header: Vec<&str> = vec!["t", "action", "loss", "delay", "arrival_round", "n_feedback_used", "cum_regret"];
    if wrapped {
        header.extend(["w", "h", "nu", "m_t", "missing_cumsum", "restarted"]);
    }
    let rows = rows
        .iter()
        .filter(|r| keep(r.t))
        .map(|r| {
            let mut row = vec![
                r.t.to_string(),
                r.action.render(),
                r.loss.to_string(),
                r.delay.to_string(),
                r.arrival.to_string(),
                r.feedback_used.to_string(),
                r.cum_regret.to_string(),
            ];
            if let Some(tm) = r.telemetry {
                row.extend([
                    tm.w.to_string(),
                    tm.h.to_string(),
                    tm.nu.to_string(),
                    tm.m_t.to_string(),
                    tm.missing_cumsum.to_string(),
                    u8::from(tm.restarted).to_string(),
                ]);
            }
            row
        })
        .collect();
    Table {
        file: format!("trajectory_seed{index}.csv"),
        schema: if wrapped { "lagbandit-trajectory-wrapped v1" } else { "lagbandit-trajectory v1" },
        header: header.into_iter().map(String::from).collect(),
        rows,
    }
}

struct SeedRun<A> {
    outcome: RunOutcome<A>,
    epochs: Vec<EpochRecord>,
}

fn single_agent<L, C, K>(
    res: &Resolved,
    pool: &rayon::ThreadPool,
    make: impl Fn(u64) -> Result<(L, Adversary<L::Action, C>)> + Sync,
    comparator: K,
    epochs: impl Fn(&L) -> Vec<EpochRecord> + Sync,
) -> Result<Vec<SeedRun<L::Action>>>
where
    L: DelayedLearner,
    L::Action: Send,
    C: crate::cost::Cost<Action = L::Action>,
    K: Comparator<C> + Clone + Sync,
{
    let options = RunOptions { checkpoints: res.config.checkpoints.clone(), record: res.config.trajectories };
    pool.install(|| {
        (0..res.config.seeds.count)
            .into_par_iter()
            .map(|i| {
                let seed = seed_of(res, i);
                let (mut learner, mut adversary) = make(seed)?;
                let mut rng = substream(seed, Stream::Learner);
                let outcome = run(
                    &mut learner,
                    &mut adversary,
                    comparator.clone(),
                    &res.delays,
                    res.config.horizon,
                    &options,
                    &mut rng,
                )?;
                Ok(SeedRun { epochs: epochs(&learner), outcome })
            })
            .collect()
    })
}

fn summarise_single<A: Render>(res: &Resolved, runs: Vec<SeedRun<A>>, report: &mut Report) {
    let cfg = &res.config;
    let fixed_eta = res.eta.as_ref().and_then(|s| match s.kind {
        StepKind::Fixed { eta } => Some(eta),
        _ => None,
    });
    for (ci, &t) in cfg.checkpoints.iter().enumerate() {
        let regrets: Vec<f64> = runs.iter().map(|r| r.outcome.checkpoints[ci].regret).collect();
        let (mean_regret, std_err) = mean_and_se(&regrets);
        let expected: Option<Vec<f64>> = runs.iter().map(|r| r.outcome.checkpoints[ci].expected_regret).collect();
        let ratios: Vec<f64> = runs.iter().map(|r| r.outcome.checkpoints[ci].discounted_ratio).collect();
        let (missing, received, discarded, kept, bound) = match (cfg.kind, fixed_eta) {
            (ExperimentKind::SingleAgentExp3, Some(eta)) => {
                let (m, r, d, k) = prefix_counts(&res.delays, t, |_, d| exp3::accepts(d, eta));
                (m, r, d, k, Some(exp3::regret_bound(res.arms, t, eta, k, m, d)))
            }
            (ExperimentKind::SingleAgentFkm, Some(eta)) => {
                let (m, r, d, k) = prefix_counts(&res.delays, t, |_, _| true);
                let body = res.body.as_ref().expect("convex run has a body");
                let delta = res.delta.expect("convex run has a radius");
                let b = fkm::regret_bound(body.dim(), t, body.diameter(), res.lipschitz, eta, delta, m, r);
                (m, r, d, k, Some(b))
            }
            _ => {
                let (m, r, _, _) = prefix_counts(&res.delays, t, |_, _| true);
                let d = if t == cfg.horizon { runs[0].outcome.discarded } else { 0 };
                (m, r, d, r, None)
            }
        };
        let _ = kept;
        report.summary.push(SummaryRow {
            t,
            mean_regret,
            std_err,
            mean_expected_regret: expected.map(|e| mean_and_se(&e).0),
            bound,
            discounted_ratio: mean_and_se(&ratios).0,
            missing,
            received_delay_sum: received,
            discarded,
        });
    }
    let keep = |t: u64| !cfg.thin || cfg.checkpoints.binary_search(&t).is_ok();
    for (i, r) in runs.iter().enumerate() {
        report.seeds.push(SeedRecord {
            index: i as u64,
            seed: seed_of(res, i as u64),
            regret: r.outcome.regret,
            expected_regret: r.outcome.expected_regret,
            missing: r.outcome.missing,
            discarded: r.outcome.discarded,
            restarts: r.outcome.restarts,
            violations: r.outcome.violations,
            max_ratio: r.outcome.max_ratio,
        });
        if cfg.trajectories {
            report.trajectories.push(trajectory_table(i as u64, &r.outcome.trajectory, keep));
        }
    }
    if let Some(first) = runs.into_iter().next() {
        report.super_epochs = first.epochs;
    }
}

fn finite_game(spec: &GameSpec) -> Result<(FiniteGame, Option<Vec<Vec<f64>>>)> {
    Ok(match spec {
        GameSpec::MatchingPennies => {
            let m = game::matching_pennies();
            (ZeroSumGame::Matrix(m.clone()).to_finite()?, Some(m))
        }
        GameSpec::Matrix { cost } => (ZeroSumGame::Matrix(cost.clone()).to_finite()?, Some(cost.clone())),
        GameSpec::Chicken => (game::chicken(), None),
        GameSpec::Bimatrix { row, col } => (FiniteGame::bimatrix(row, col)?, None),
        GameSpec::QuadraticSaddle { .. } => return Err(Error::Config("not a finite game".into())),
    })
}

fn joint_table(index: u64, players: usize, outcome: &JointOutcome, keep: impl Fn(u64) -> bool) -> Table {
    let mut header = vec!["t".to_string(), "eta".to_string()];
    for p in 0..players {
        header.extend([format!("p{p}_action"), format!("p{p}_loss"), format!("p{p}_m_t")]);
    }
    let rows = outcome
        .trajectory
        .iter()
        .filter(|r| keep(r.t))
        .map(|r| {
            let mut row = vec![r.t.to_string(), r.eta.to_string()];
            for p in 0..players {
                row.extend([r.actions[p].to_string(), r.losses[p].to_string(), r.missing[p].to_string()]);
            }
            row
        })
        .collect();
    Table { file: format!("joint_trajectory_seed{index}.csv"), schema: "lagbandit-joint-trajectory v1", header, rows }
}

fn play_finite_game(res: &Resolved, pool: &rayon::ThreadPool, report: &mut Report) -> Result<()> {
    let cfg = &res.config;
    let (game, matrix) = finite_game(cfg.game.as_ref().expect("resolved game"))?;
    let schedule = res.eta.clone().expect("resolved step size");
    let delays = vec![res.delays.clone(), res.column_delays.clone()];
    let outcomes: Vec<JointOutcome> = pool.install(|| {
        (0..cfg.seeds.count)
            .into_par_iter()
            .map(|i| {
                let seed = seed_of(res, i);
                let mut learners = game
                    .action_counts()
                    .iter()
                    .map(|&k| Exp3::new(k, schedule.clone(), res.gamma))
                    .collect::<Result<Vec<_>>>()?;
                let mut rngs: Vec<_> = (0..game.players()).map(|p| substream(seed, Stream::Player(p as u32))).collect();
                game::play_finite(
                    &game,
                    &mut learners,
                    &delays,
                    &schedule,
                    cfg.horizon,
                    &cfg.checkpoints,
                    cfg.trajectories,
                    &mut rngs,
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let seeds = outcomes.len() as f64;
    for (ci, &t) in cfg.checkpoints.iter().enumerate() {
        let cps: Vec<&game::GameCheckpoint> = outcomes.iter().map(|o| &o.checkpoints[ci]).collect();
        let max_ratios: Vec<f64> =
            cps.iter().map(|c| c.discounted_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
        let max_regrets: Vec<f64> = cps.iter().map(|c| c.regrets.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
        let (ratio_mean, ratio_se) = mean_and_se(&max_ratios);
        let (regret_mean, regret_se) = mean_and_se(&max_regrets);
        let row = match &matrix {
            Some(u) => {
                let zs = ZeroSumGame::Matrix(u.clone());
                let mut gaps = Vec::new();
                let mut mixed = Vec::new();
                let mut values = Vec::new();
                for c in &cps {
                    let (y, z) = marginals(&game, &c.rho);
                    gaps.push(ne_gap_zero_sum(&zs, &y, &z)?);
                    values.push(game_value_bilinear(u, &y, &z)?);
                    mixed.push(ne_gap_zero_sum(&zs, &c.mean_strategies[0], &c.mean_strategies[1])?);
                }
                let (gap, gap_std_err) = mean_and_se(&gaps);
                GapRow {
                    t,
                    gap,
                    gap_std_err,
                    gap_mixed: Some(mean_and_se(&mixed).0),
                    value: Some(mean_and_se(&values).0),
                    max_ratio: Some(ratio_mean),
                    max_ratio_std_err: Some(ratio_se),
                }
            }
            None => {
                let mut rho = vec![0.0; game.profiles()];
                let mut rho_mixed = vec![0.0; game.profiles()];
                let mut per_seed = Vec::new();
                for c in &cps {
                    rho.iter_mut().zip(&c.rho).for_each(|(a, b)| *a += b / seeds);
                    rho_mixed.iter_mut().zip(&c.rho_mixed).for_each(|(a, b)| *a += b / seeds);
                    per_seed.push(cce_gap(&c.rho, &game)?);
                }
                GapRow {
                    t,
                    gap: cce_gap(&rho, &game)?,
                    gap_std_err: mean_and_se(&per_seed).1,
                    gap_mixed: Some(cce_gap(&rho_mixed, &game)?),
                    value: None,
                    max_ratio: Some(ratio_mean),
                    max_ratio_std_err: Some(ratio_se),
                }
            }
        };
        report.gaps.push(row);
        let (m, r, _, _) = prefix_counts(&res.delays, t, |_, _| true);
        report.summary.push(SummaryRow {
            t,
            mean_regret: regret_mean,
            std_err: regret_se,
            mean_expected_regret: None,
            bound: None,
            discounted_ratio: ratio_mean,
            missing: m,
            received_delay_sum: r,
            discarded: if t == cfg.horizon { outcomes[0].players[0].discarded } else { 0 },
        });
    }
    let keep = |t: u64| !cfg.thin || cfg.checkpoints.binary_search(&t).is_ok();
    for (i, o) in outcomes.iter().enumerate() {
        let last = o.checkpoints.last().expect("horizon checkpoint");
        report.seeds.push(SeedRecord {
            index: i as u64,
            seed: seed_of(res, i as u64),
            regret: last.regrets.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            expected_regret: None,
            missing: o.players.iter().map(|p| p.missing).max().unwrap_or(0),
            discarded: o.players.iter().map(|p| p.discarded).sum(),
            restarts: 0,
            violations: o.players.iter().map(|p| p.violations).sum(),
            max_ratio: o.players.iter().map(|p| p.max_ratio).fold(0.0, f64::max),
        });
        if cfg.trajectories {
            report.trajectories.push(joint_table(i as u64, game.players(), o, keep));
        }
    }
    Ok(())
}

/// Row and column marginals of a two-player profile distribution.
pub fn marginals(game: &FiniteGame, rho: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let k = game.action_counts();
    let mut y = vec![0.0; k[0]];
    let mut z = vec![0.0; k[1]];
    for (i, r) in rho.iter().enumerate() {
        let p = game.profile(i);
        y[p[0]] += r;
        z[p[1]] += r;
    }
    // normalise away rounding so the simplex check holds
    let (sy, sz): (f64, f64) = (y.iter().sum(), z.iter().sum());
    y.iter_mut().for_each(|v| *v /= sy);
    z.iter_mut().for_each(|v| *v /= sz);
    (y, z)
}

fn play_saddle_game(res: &Resolved, pool: &rayon::ThreadPool, report: &mut Report) -> Result<()> {
    let cfg = &res.config;
    let Some(GameSpec::QuadraticSaddle { offset, alpha, beta, lin_y, lin_z, coupling, y_body, z_body }) = cfg.game.clone() else {
        return Err(Error::Config("expected a quadratic saddle game".into()));
    };
    let q = QuadraticSaddle { offset, alpha, beta, lin_y, lin_z, coupling };
    let game = ConvexConcaveGame::quadratic(q, y_body.clone(), z_body.clone())?;
    let schedule = res.eta.clone().expect("resolved step size");
    let delta = res.delta.expect("resolved radius");
    let outcomes: Vec<SaddleOutcome> = pool.install(|| {
        (0..cfg.seeds.count)
            .into_par_iter()
            .map(|i| {
                let seed = seed_of(res, i);
                let mut y = Fkm::new(y_body.clone(), delta, schedule.clone())?;
                let mut z = Fkm::new(z_body.clone(), delta, schedule.clone())?;
                let mut rngs = [substream(seed, Stream::Player(0)), substream(seed, Stream::Player(1))];
                game::play_saddle(
                    &game,
                    &mut y,
                    &mut z,
                    [&res.delays, &res.column_delays],
                    &schedule,
                    cfg.horizon,
                    &cfg.checkpoints,
                    cfg.trajectories,
                    &mut rngs,
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for (ci, &t) in cfg.checkpoints.iter().enumerate() {
        let gaps: Vec<f64> = outcomes.iter().map(|o| o.checkpoints[ci].ne_gap).collect();
        let values: Vec<f64> =
            outcomes.iter().map(|o| (game.u)(&o.checkpoints[ci].y_bar, &o.checkpoints[ci].z_bar)).collect();
        let (gap, gap_std_err) = mean_and_se(&gaps);
        report.gaps.push(GapRow {
            t,
            gap,
            gap_std_err,
            gap_mixed: None,
            value: Some(mean_and_se(&values).0),
            max_ratio: None,
            max_ratio_std_err: None,
        });
    }
    let keep = |t: u64| !cfg.thin || cfg.checkpoints.binary_search(&t).is_ok();
    for (i, o) in outcomes.iter().enumerate() {
        report.seeds.push(SeedRecord {
            index: i as u64,
            seed: seed_of(res, i as u64),
            regret: f64::NAN,
            expected_regret: None,
            missing: o.trajectory.last().map_or(0, |r| r.missing[0].max(r.missing[1])),
            discarded: 0,
            restarts: 0,
            violations: 0,
            max_ratio: 0.0,
        });
        if cfg.trajectories {
            let header = ["t", "eta", "p0_action", "p0_loss", "p0_m_t", "p1_action", "p1_loss", "p1_m_t"];
            let rows = o
                .trajectory
                .iter()
                .filter(|r| keep(r.t))
                .map(|r| {
                    vec![
                        r.t.to_string(),
                        r.eta.to_string(),
                        r.y.render(),
                        r.value.to_string(),
                        r.missing[0].to_string(),
                        r.z.render(),
                        (1.0 - r.value).to_string(),
                        r.missing[1].to_string(),
                    ]
                })
                .collect();
            report.trajectories.push(Table {
                file: format!("joint_trajectory_seed{i}.csv"),
                schema: "lagbandit-joint-trajectory v1",
                header: header.iter().map(|s| s.to_string()).collect(),
                rows,
            });
        }
    }
    Ok(())
}

/// Run every seed of a resolved configuration. Nothing is written.
pub fn execute(res: &Resolved) -> Result<Report> {
    use ExperimentKind as K;
    let pool = worker_pool()?;
    let cfg = &res.config;
    let mut report = Report {
        resolved: res.clone(),
        effective_delay_sum: effective_delay_sum(&res.delays, cfg.horizon),
        summary: Vec::new(),
        gaps: Vec::new(),
        seeds: Vec::new(),
        super_epochs: Vec::new(),
        exponent: None,
        trajectories: Vec::new(),
    };
    let t = cfg.horizon;
    let adversary = cfg.adversary.as_ref();
    match cfg.kind {
        K::SingleAgentExp3 | K::Proposition2 => {
            let spec = adversary.ok_or_else(|| Error::Config("missing [adversary]".into()))?;
            let schedule = res.eta.clone().expect("resolved step size");
            let runs = single_agent(
                res,
                &pool,
                |_| Ok((Exp3::new(res.arms, schedule.clone(), res.gamma)?, arm_adversary(spec, res.arms, t)?)),
                ArmComparator::new(res.arms),
                |_| Vec::new(),
            )?;
            summarise_single(res, runs, &mut report);
        }
        K::WrappedExp3 => {
            let spec = adversary.ok_or_else(|| Error::Config("missing [adversary]".into()))?;
            let runs = single_agent(
                res,
                &pool,
                |seed| Ok((wrapped_exp3(res.arms, res.gamma, seed)?, arm_adversary(spec, res.arms, t)?)),
                ArmComparator::new(res.arms),
                |w| w.epoch_records(),
            )?;
            summarise_single(res, runs, &mut report);
        }
        K::SingleAgentFkm | K::Proposition1 => {
            let spec = adversary.ok_or_else(|| Error::Config("missing [adversary]".into()))?;
            let body = res.body.clone().expect("resolved body");
            let schedule = res.eta.clone().expect("resolved step size");
            let delta = res.delta.expect("resolved radius");
            let runs = single_agent(
                res,
                &pool,
                |_| Ok((Fkm::new(body.clone(), delta, schedule.clone())?, convex_adversary(spec, &body, t)?)),
                ConvexComparator::new(body.clone()),
                |_| Vec::new(),
            )?;
            summarise_single(res, runs, &mut report);
        }
        K::WrappedFkm => {
            let spec = adversary.ok_or_else(|| Error::Config("missing [adversary]".into()))?;
            let body = res.body.clone().expect("resolved body");
            let runs = single_agent(
                res,
                &pool,
                |seed| {
                    Ok((wrapped_fkm(body.clone(), res.lipschitz, res.delta0, seed)?, convex_adversary(spec, &body, t)?))
                },
                ConvexComparator::new(body.clone()),
                |w| w.epoch_records(),
            )?;
            summarise_single(res, runs, &mut report);
        }
        K::ZeroSumGame if matches!(cfg.game, Some(GameSpec::QuadraticSaddle { .. })) => {
            play_saddle_game(res, &pool, &mut report)?
        }
        K::ZeroSumGame | K::FiniteGameCce => play_finite_game(res, &pool, &mut report)?,
    }
    if report.summary.len() >= 4 {
        let pts: Vec<(u64, f64)> = report.summary.iter().map(|r| (r.t, r.mean_regret)).collect();
        report.exponent = fit_regret_exponent(&pts).ok();
    }
    Ok(report)
}

/// Resolve, execute and write the artifact directory. Returns the report
/// and the directory written.
pub fn run_experiment(config: &RunConfig) -> Result<(Report, PathBuf)> {
    let started = Instant::now();
    let res = resolve(config)?;
    let report = execute(&res)?;
    let dir = config.output.clone();
    artifacts::write_all(&report, &dir, started.elapsed().as_secs_f64())?;
    Ok((report, dir))
}

/// Set a dotted key (`algorithm.eta`, `delay.delay`, `horizon`) in a TOML
/// config to a literal given on the command line.
pub fn with_param(base: &toml::Table, key: &str, literal: &str) -> Result<RunConfig> {
    let value: toml::Value = literal
        .parse::<i64>()
        .map(toml::Value::Integer)
        .or_else(|_| literal.parse::<f64>().map(toml::Value::Float))
        .or_else(|_| literal.parse::<bool>().map(toml::Value::Boolean))
        .unwrap_or_else(|_| toml::Value::String(literal.to_string()));
    let mut table = base.clone();
    let mut parts = key.split('.').peekable();
    let mut cursor = &mut table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            cursor.insert(part.to_string(), value.clone());
            break;
        }
        cursor = cursor
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{part} in {key} is not a table")))?;
    }
    RunConfig::from_toml(&toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?)
}

/// One run per value, each written to `<output>/<param>=<value>`.
pub fn sweep(path: &Path, param: &str, values: &[String]) -> Result<Vec<(String, Report)>> {
    let text = std::fs::read_to_string(path)?;
    let base: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let mut out = Vec::new();
    for v in values {
        let mut cfg = with_param(&base, param, v)?;
        cfg.output = cfg.output.join(format!("{param}={v}"));
        let (report, _) = run_experiment(&cfg)?;
        out.push((v.clone(), report));
    }
    Ok(out)
}
