//! WebAssembly entry points for the demo page. Each returns a JSON string
//! the page plots; the same functions are plain Rust for native tests.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use lagbandit::cost::{Adversary, ArmComparator, ArmLosses};
use lagbandit::delay::{received_delay_sum, DelaySchedule};
use lagbandit::doubling::wrapped_exp3;
use lagbandit::exp3::{self, Exp3, GammaMode};
use lagbandit::experiment::runner::{marginals, prefix_counts};
use lagbandit::game::{matching_pennies, ne_gap_zero_sum, play_finite, ZeroSumGame};
use lagbandit::rng::{substream, Stream};
use lagbandit::sim::{run, RunOptions};
use lagbandit::step::StepSchedule;
use lagbandit::{Error, Result};

const MAX_HORIZON: u64 = 1 << 20;
const POINTS: u64 = 60;

#[derive(Debug, Serialize)]
pub struct RegretPoint {
    pub t: u64,
    pub regret: f64,
    pub bound: f64,
}

#[derive(Debug, Serialize)]
pub struct GapPoint {
    pub t: u64,
    pub gap: f64,
}

#[derive(Debug, Serialize)]
pub struct TracePoint {
    pub t: u64,
    pub w: u32,
    pub h: u32,
    pub nu: u32,
    pub missing_cumsum: u64,
}

#[derive(Debug, Serialize)]
pub struct Trace {
    pub points: Vec<TracePoint>,
    pub restarts: Vec<u64>,
}

fn check_horizon(horizon: u64) -> Result<()> {
    if !(POINTS..=MAX_HORIZON).contains(&horizon) {
        return Err(Error::Config(format!("horizon must lie in {POINTS}..={MAX_HORIZON}")));
    }
    Ok(())
}

/// Roughly evenly spaced checkpoints ending at the horizon.
fn grid(horizon: u64) -> Vec<u64> {
    let mut g: Vec<u64> = (1..=POINTS).map(|i| (horizon * i / POINTS).max(1)).collect();
    g.dedup();
    g
}

fn schedule(power: f64, scale: u64) -> DelaySchedule {
    if power <= 0.0 {
        DelaySchedule::Constant { delay: scale.max(1) }
    } else {
        DelaySchedule::PowerLaw { alpha: power }
    }
}

/// EXP3 with the known-parameter step size on arm losses `0, 1, ..., 1`;
/// realised regret against the bound evaluated on each prefix.
pub fn exp3_regret(arms: usize, horizon: u64, delay: u64, power: f64, seed: u64) -> Result<Vec<RegretPoint>> {
    check_horizon(horizon)?;
    let delays = schedule(power, delay).realize(horizon)?;
    let eta = exp3::fixed_eta(arms, horizon, received_delay_sum(&delays, horizon));
    let mut learner = Exp3::new(arms, StepSchedule::fixed(eta), GammaMode::Zero)?;
    let losses: Vec<f64> = (0..arms).map(|i| if i == 0 { 0.0 } else { 1.0 }).collect();
    let mut adversary: Adversary<usize, ArmLosses> = Adversary::Oblivious(Box::new(move |_| ArmLosses(losses.clone())));
    let opts = RunOptions { checkpoints: grid(horizon), record: false };
    let mut rng = substream(seed, Stream::Learner);
    let out = run(&mut learner, &mut adversary, ArmComparator::new(arms), &delays, horizon, &opts, &mut rng)?;
    Ok(out
        .checkpoints
        .iter()
        .map(|c| {
            let (m, _, d, kept) = prefix_counts(&delays, c.t, |_, d| exp3::accepts(d, eta));
            RegretPoint { t: c.t, regret: c.regret, bound: exp3::regret_bound(arms, c.t, eta, kept, m, d) }
        })
        .collect())
}

/// Matching pennies between two delayed EXP3 players; exploitability of
/// the discounted ergodic averages of the played actions.
pub fn zero_sum_gap(horizon: u64, power: f64, seed: u64) -> Result<Vec<GapPoint>> {
    check_horizon(horizon)?;
    let m = matching_pennies();
    let zs = ZeroSumGame::Matrix(m);
    let game = zs.to_finite()?;
    let delays = schedule(power, 1).realize(horizon)?;
    let eta = StepSchedule::power_log(1.0, 0.625).capped_for_exp3();
    let mut learners: Vec<Exp3> = (0..2).map(|_| Exp3::new(2, eta.clone(), GammaMode::EqualEta)).collect::<Result<_>>()?;
    let mut rngs: Vec<_> = (0..2).map(|p| substream(seed, Stream::Player(p))).collect();
    let out = play_finite(&game, &mut learners, &[delays.clone(), delays], &eta, horizon, &grid(horizon), false, &mut rngs)?;
    out.checkpoints
        .iter()
        .map(|c| {
            let (y, z) = marginals(&game, &c.rho);
            Ok(GapPoint { t: c.t, gap: ne_gap_zero_sum(&zs, &y, &z)? })
        })
        .collect()
}

/// Index trajectory of the doubling-wrapped EXP3 under uniform random
/// delays in `1..=max_delay`.
pub fn doubling_trace(horizon: u64, max_delay: u64, seed: u64) -> Result<Trace> {
    check_horizon(horizon)?;
    let delays = DelaySchedule::RandomBounded { max: max_delay.max(1), seed }.realize(horizon)?;
    let mut learner = wrapped_exp3(2, GammaMode::Zero, seed)?;
    let mut adversary: Adversary<usize, ArmLosses> = Adversary::Oblivious(Box::new(|_| ArmLosses(vec![0.0, 1.0])));
    let opts = RunOptions { checkpoints: Vec::new(), record: true };
    let mut rng = substream(seed, Stream::Learner);
    let out = run(&mut learner, &mut adversary, ArmComparator::new(2), &delays, horizon, &opts, &mut rng)?;
    let keep = grid(horizon);
    let mut trace = Trace { points: Vec::new(), restarts: Vec::new() };
    for r in &out.trajectory {
        let tm = r.telemetry.expect("wrapped learner reports telemetry");
        if tm.restarted {
            trace.restarts.push(r.t);
        }
        if tm.restarted || keep.binary_search(&r.t).is_ok() {
            trace.points.push(TracePoint { t: r.t, w: tm.w, h: tm.h, nu: tm.nu, missing_cumsum: tm.missing_cumsum });
        }
    }
    Ok(trace)
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsValue> {
    let v = r.map_err(|e| JsValue::from_str(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = exp3Regret)]
pub fn exp3_regret_js(arms: usize, horizon: u32, delay: u32, power: f64, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(exp3_regret(arms, horizon as u64, delay as u64, power, seed as u64))
}

#[wasm_bindgen(js_name = zeroSumGap)]
pub fn zero_sum_gap_js(horizon: u32, power: f64, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(zero_sum_gap(horizon as u64, power, seed as u64))
}

#[wasm_bindgen(js_name = doublingTrace)]
pub fn doubling_trace_js(horizon: u32, max_delay: u32, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(doubling_trace(horizon as u64, max_delay as u64, seed as u64))
}
