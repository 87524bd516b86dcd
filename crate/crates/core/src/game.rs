//! Repeated games played by delayed-feedback learners, and the equilibrium
//! metrics of their discounted ergodic play.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::body::{dot, ConvexBody};
use crate::cost::ArmComparator;
use crate::cost::Comparator;
use crate::cost::ArmLosses;
use crate::error::{Error, Result};
use crate::learner::{DelayedLearner, SimRng};
use crate::queue::{DeliveryQueue, FeedbackEvent};
use crate::rng::{substream, Stream};
use crate::step::StepSchedule;

/// Normal-form game with utilities in `[0, 1]`. Profiles are indexed in
/// mixed radix with the last player varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGame {
    action_counts: Vec<usize>,
    strides: Vec<usize>,
    utilities: Vec<Vec<f64>>,
}

impl FiniteGame {
    pub fn new(action_counts: Vec<usize>, utilities: Vec<Vec<f64>>) -> Result<Self> {
        if action_counts.is_empty() || action_counts.contains(&0) {
            return Err(Error::Config("every player needs at least one action".into()));
        }
        let profiles: usize = action_counts.iter().product();
        if utilities.len() != action_counts.len() || utilities.iter().any(|u| u.len() != profiles) {
            return Err(Error::Config(format!(
                "utility tensor shape does not match {} players with {profiles} profiles",
                action_counts.len()
            )));
        }
        if let Some(&value) = utilities.iter().flatten().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::CostOutOfRange { round: 0, value });
        }
        let mut strides = vec![1; action_counts.len()];
        for n in (0..action_counts.len() - 1).rev() {
            strides[n] = strides[n + 1] * action_counts[n + 1];
        }
        Ok(Self { action_counts, strides, utilities })
    }

    /// Two players with row-player utilities `u1[i][j]` and column-player
    /// utilities `u2[i][j]`.
    pub fn bimatrix(u1: &[Vec<f64>], u2: &[Vec<f64>]) -> Result<Self> {
        let rows = u1.len();
        let cols = u1.first().map_or(0, Vec::len);
        if u2.len() != rows || u1.iter().chain(u2).any(|r| r.len() != cols) {
            return Err(Error::Config("bimatrix shapes differ".into()));
        }
        Self::new(vec![rows, cols], vec![u1.concat(), u2.concat()])
    }

    pub fn players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn profiles(&self) -> usize {
        self.utilities[0].len()
    }

    pub fn index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn profile(&self, mut index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let a = index / s;
                index %= s;
                a
            })
            .collect()
    }

    pub fn utility(&self, player: usize, index: usize) -> f64 {
        self.utilities[player][index]
    }

    /// Index of `index` with player `n` switched to action `a`.
    fn deviate(&self, index: usize, n: usize, a: usize) -> usize {
        let s = self.strides[n];
        let own = (index / s) % self.action_counts[n];
        index - own * s + a * s
    }

    /// `1 - u_n(a, a_{-n})` for every action `a` of player `n`.
    pub fn loss_vector(&self, n: usize, index: usize) -> Vec<f64> {
        (0..self.action_counts[n]).map(|a| 1.0 - self.utilities[n][self.deviate(index, n, a)]).collect()
    }

    /// Product distribution over profiles from per-player mixed strategies.
    pub fn product(&self, strategies: &[&[f64]]) -> Vec<f64> {
        (0..self.profiles())
            .map(|i| self.profile(i).iter().zip(strategies).map(|(&a, p)| p[a]).product())
            .collect()
    }
}

/// Largest gain any player gets from a fixed deviation under `rho`;
/// `rho` is an eps-CCE iff the result is at most eps.
pub fn cce_gap(rho: &[f64], game: &FiniteGame) -> Result<f64> {
    if rho.len() != game.profiles() {
        return Err(Error::Config(format!("distribution has {} entries, game has {} profiles", rho.len(), game.profiles())));
    }
    let mut gap = f64::NEG_INFINITY;
    for n in 0..game.players() {
        let base: f64 = rho.iter().enumerate().map(|(i, r)| r * game.utility(n, i)).sum();
        for a in 0..game.action_counts[n] {
            let dev: f64 = rho.iter().enumerate().map(|(i, r)| r * game.utility(n, game.deviate(i, n, a))).sum();
            gap = gap.max(dev - base);
        }
    }
    Ok(gap)
}

pub fn check_simplex(p: &[f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|&v| v < -1e-9) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotSimplex(format!("{p:?}")));
    }
    Ok(())
}

/// `y^T U z`.
pub fn game_value_bilinear(u: &[Vec<f64>], y: &[f64], z: &[f64]) -> Result<f64> {
    check_simplex(y)?;
    check_simplex(z)?;
    if y.len() != u.len() || u.iter().any(|r| r.len() != z.len()) {
        return Err(Error::Config("strategy length does not match the matrix".into()));
    }
    Ok(u.iter().zip(y).map(|(row, yi)| yi * dot(row, z)).sum())
}

/// `u(y, z) = c + alpha |y|^2 + <b_y, y> + y^T C z + <b_z, z> - beta |z|^2`,
/// convex in `y` and concave in `z` for `alpha, beta >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSaddle {
    pub offset: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lin_y: Vec<f64>,
    pub lin_z: Vec<f64>,
    pub coupling: Vec<Vec<f64>>,
}

impl QuadraticSaddle {
    pub fn eval(&self, y: &[f64], z: &[f64]) -> f64 {
        let cz: Vec<f64> = self.coupling.iter().map(|row| dot(row, z)).collect();
        self.offset + self.alpha * dot(y, y) + dot(&self.lin_y, y) + dot(y, &cz) + dot(&self.lin_z, z)
            - self.beta * dot(z, z)
    }

    fn best_y(&self, body: &ConvexBody, z: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = self.coupling.iter().zip(&self.lin_y).map(|(row, b)| b + dot(row, z)).collect();
        if self.alpha > 0.0 {
            let mut y: Vec<f64> = g.iter().map(|v| -v / (2.0 * self.alpha)).collect();
            body.project(&mut y);
            y
        } else {
            body.argmin_linear(&g)
        }
    }

    fn best_z(&self, body: &ConvexBody, y: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = (0..self.lin_z.len())
            .map(|j| self.lin_z[j] + y.iter().zip(&self.coupling).map(|(yi, row)| yi * row[j]).sum::<f64>())
            .collect();
        if self.beta > 0.0 {
            let mut z: Vec<f64> = g.iter().map(|v| v / (2.0 * self.beta)).collect();
            body.project(&mut z);
            z
        } else {
            body.argmin_linear(&g.iter().map(|v| -v).collect::<Vec<_>>())
        }
    }
}

pub type SaddleFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum BestResponse {
    Quadratic(QuadraticSaddle),
    /// 1000-point grid search, one-dimensional bodies only.
    Grid1D,
}

#[derive(Clone)]
pub struct ConvexConcaveGame {
    pub u: SaddleFn,
    pub y_body: ConvexBody,
    pub z_body: ConvexBody,
    best: BestResponse,
}

impl fmt::Debug for ConvexConcaveGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexConcaveGame").field("y_body", &self.y_body).field("z_body", &self.z_body).finish()
    }
}

impl ConvexConcaveGame {
    pub fn quadratic(q: QuadraticSaddle, y_body: ConvexBody, z_body: ConvexBody) -> Result<Self> {
        if q.alpha < 0.0 || q.beta < 0.0 {
            return Err(Error::Config("quadratic saddle needs alpha, beta >= 0".into()));
        }
        let (ny, nz) = (y_body.dim(), z_body.dim());
        if q.lin_y.len() != ny || q.lin_z.len() != nz || q.coupling.len() != ny || q.coupling.iter().any(|r| r.len() != nz) {
            return Err(Error::Config("quadratic saddle dimensions do not match the bodies".into()));
        }
        let eval = q.clone();
        Ok(Self { u: Arc::new(move |y, z| eval.eval(y, z)), y_body, z_body, best: BestResponse::Quadratic(q) })
    }

    /// A general one-dimensional game. Convexity in `y` and concavity in
    /// `z` are spot-checked with second differences at random points.
    pub fn one_dimensional(u: SaddleFn, y_body: ConvexBody, z_body: ConvexBody, seed: u64) -> Result<Self> {
        if y_body.dim() != 1 || z_body.dim() != 1 {
            return Err(Error::Config("grid best responses need one-dimensional bodies".into()));
        }
        let mut rng = substream(seed, Stream::Adversary);
        let h = 1e-3;
        let inner = |b: &ConvexBody, rng: &mut SimRng| {
            let r = match *b {
                ConvexBody::Ball { radius, .. } => radius,
                ConvexBody::Box { half_width, .. } => half_width,
            };
            rng.random_range(-(r - 2.0 * h)..(r - 2.0 * h))
        };
        for _ in 0..200 {
            let (y, z) = (inner(&y_body, &mut rng), inner(&z_body, &mut rng));
            let cy = u(&[y + h], &[z]) + u(&[y - h], &[z]) - 2.0 * u(&[y], &[z]);
            let cz = u(&[y], &[z + h]) + u(&[y], &[z - h]) - 2.0 * u(&[y], &[z]);
            if cy < -1e-9 {
                return Err(Error::Config(format!("not convex in y near ({y}, {z})")));
            }
            if cz > 1e-9 {
                return Err(Error::Config(format!("not concave in z near ({y}, {z})")));
            }
        }
        Ok(Self { u, y_body, z_body, best: BestResponse::Grid1D })
    }

    fn grid(body: &ConvexBody) -> Vec<f64> {
        body.grid(1000).into_iter().map(|p| p[0]).collect()
    }

    fn min_over_y(&self, z: &[f64]) -> f64 {
        match &self.best {
            BestResponse::Quadratic(q) => (self.u)(&q.best_y(&self.y_body, z), z),
            BestResponse::Grid1D => Self::grid(&self.y_body).iter().map(|&y| (self.u)(&[y], z)).fold(f64::INFINITY, f64::min),
        }
    }

    fn max_over_z(&self, y: &[f64]) -> f64 {
        match &self.best {
            BestResponse::Quadratic(q) => (self.u)(y, &q.best_z(&self.z_body, y)),
            BestResponse::Grid1D => {
                Self::grid(&self.z_body).iter().map(|&z| (self.u)(y, &[z])).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum ZeroSumGame {
    /// Row player pays `U[i][j]`, column player receives it.
    Matrix(Vec<Vec<f64>>),
    ConvexConcave(ConvexConcaveGame),
}

impl ZeroSumGame {
    /// The two-player normal form: row utility `1 - U`, column utility `U`,
    /// so the row learner is fed `U` and the column learner `1 - U`.
    pub fn to_finite(&self) -> Result<FiniteGame> {
        match self {
            ZeroSumGame::Matrix(u) => {
                let row: Vec<Vec<f64>> = u.iter().map(|r| r.iter().map(|v| 1.0 - v).collect()).collect();
                FiniteGame::bimatrix(&row, u)
            }
            ZeroSumGame::ConvexConcave(_) => Err(Error::Config("convex-concave games have no normal form".into())),
        }
    }
}

/// Exploitability `max{u(y,z) - min_y' u(y',z), max_z' u(y,z') - u(y,z)}`.
pub fn ne_gap_zero_sum(game: &ZeroSumGame, y: &[f64], z: &[f64]) -> Result<f64> {
    match game {
        ZeroSumGame::Matrix(u) => {
            let value = game_value_bilinear(u, y, z)?;
            let best_row = u.iter().map(|row| dot(row, z)).fold(f64::INFINITY, f64::min);
            let best_col = (0..z.len())
                .map(|j| u.iter().zip(y).map(|(row, yi)| yi * row[j]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((value - best_row).max(best_col - value))
        }
        ZeroSumGame::ConvexConcave(g) => {
            if !g.y_body.contains(y, 1e-9) || !g.z_body.contains(z, 1e-9) {
                return Err(Error::Config("strategy outside its body".into()));
            }
            let value = (g.u)(y, z);
            Ok((value - g.min_over_y(z)).max(g.max_over_z(y) - value))
        }
    }
}

/// `rho_T(a) = sum_t eta_t 1{a_t = a} / sum_t eta_t` over profile indices.
pub fn discounted_ergodic_distribution(profiles: &[usize], etas: &[f64], n_profiles: usize) -> Vec<f64> {
    let mut rho = vec![0.0; n_profiles];
    for (&p, &e) in profiles.iter().zip(etas) {
        rho[p] += e;
    }
    let total: f64 = etas[..profiles.len()].iter().sum();
    rho.iter_mut().for_each(|r| *r /= total);
    rho
}

/// Probability-weight variant: mixes each round's joint distribution.
pub fn discounted_ergodic_mixture(joint: &[Vec<f64>], etas: &[f64]) -> Vec<f64> {
    let mut rho = vec![0.0; joint.first().map_or(0, Vec::len)];
    for (p, &e) in joint.iter().zip(etas) {
        rho.iter_mut().zip(p).for_each(|(r, q)| *r += e * q);
    }
    let total: f64 = etas[..joint.len()].iter().sum();
    rho.iter_mut().for_each(|r| *r /= total);
    rho
}

/// `sum_t eta_t a_t / sum_t eta_t`.
pub fn discounted_ergodic_average(points: &[Vec<f64>], etas: &[f64]) -> Vec<f64> {
    let mut avg = vec![0.0; points.first().map_or(0, Vec::len)];
    for (p, &e) in points.iter().zip(etas) {
        avg.iter_mut().zip(p).for_each(|(a, x)| *a += e * x);
    }
    let total: f64 = etas[..points.len()].iter().sum();
    avg.iter_mut().for_each(|a| *a /= total);
    avg
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointRound {
    pub t: u64,
    pub actions: Vec<usize>,
    pub losses: Vec<f64>,
    /// Samples of each player still in flight after delivery.
    pub missing: Vec<u64>,
    pub eta: f64,
}

/// Discounted ergodic statistics of the prefix `1..=t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GameCheckpoint {
    pub t: u64,
    /// Indicator-weighted `rho_T`.
    pub rho: Vec<f64>,
    /// Probability-weighted `rho_T`.
    pub rho_mixed: Vec<f64>,
    /// Per player, the eta-weighted average of its mixed strategies.
    pub mean_strategies: Vec<Vec<f64>>,
    /// Per player, the discounted-regret ratio on realised losses.
    pub discounted_ratios: Vec<f64>,
    pub regrets: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlayerStats {
    pub missing: u64,
    pub discarded: u64,
    pub violations: u64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct JointOutcome {
    pub checkpoints: Vec<GameCheckpoint>,
    pub trajectory: Vec<JointRound>,
    pub players: Vec<PlayerStats>,
}

struct Ergodic {
    rho: Vec<f64>,
    rho_mixed: Vec<f64>,
    strategies: Vec<Vec<f64>>,
    eta_sum: f64,
}

/// Play a finite game. Each player has its own delay sequence and queue;
/// its realised loss `1 - u_n(a_t)` is delivered only to it.
#[allow(clippy::too_many_arguments)]
pub fn play_finite<L>(
    game: &FiniteGame,
    learners: &mut [L],
    delays: &[Vec<u64>],
    eta: &StepSchedule,
    horizon: u64,
    checkpoints: &[u64],
    record: bool,
    rngs: &mut [SimRng],
) -> Result<JointOutcome>
where
    L: DelayedLearner<Action = usize>,
{
    let n = game.players();
    if learners.len() != n || delays.len() != n || rngs.len() != n {
        return Err(Error::Config(format!(
            "game has {n} players but got {} learners, {} delay sequences, {} generators",
            learners.len(),
            delays.len(),
            rngs.len()
        )));
    }
    if delays.iter().any(|d| (d.len() as u64) < horizon) {
        return Err(Error::Config("delay sequence shorter than the horizon".into()));
    }
    let mut queues: Vec<DeliveryQueue<usize>> = (0..n).map(|_| DeliveryQueue::new()).collect();
    let mut plain: Vec<ArmComparator> = game.action_counts().iter().map(|&k| ArmComparator::new(k)).collect();
    let mut weighted = plain.clone();
    let mut incurred = vec![0.0; n];
    let mut incurred_weighted = vec![0.0; n];
    let mut erg = Ergodic {
        rho: vec![0.0; game.profiles()],
        rho_mixed: vec![0.0; game.profiles()],
        strategies: game.action_counts().iter().map(|&k| vec![0.0; k]).collect(),
        eta_sum: 0.0,
    };
    let mut out = JointOutcome { checkpoints: Vec::new(), trajectory: Vec::new(), players: vec![PlayerStats::default(); n] };
    let mut next_checkpoint = checkpoints.iter().copied().filter(|&c| c <= horizon).peekable();
    let mut mixed: Vec<Vec<f64>> = vec![Vec::new(); n];

    for t in 1..=horizon {
        let e = eta.at(t);
        for (p, l) in learners.iter().enumerate() {
            if (l.eta(t) - e).abs() > 1e-15 * e.max(1.0) {
                return Err(Error::Config(format!("player {p} uses a different step-size schedule")));
            }
            mixed[p] = l.distribution().map(<[f64]>::to_vec).unwrap_or_default();
        }
        let actions: Vec<usize> = learners.iter_mut().zip(rngs.iter_mut()).map(|(l, r)| l.act(t, r)).collect();
        let index = game.index(&actions);

        let mut losses = Vec::with_capacity(n);
        let mut missing = Vec::with_capacity(n);
        for p in 0..n {
            let lv = ArmLosses(game.loss_vector(p, index));
            let loss = lv.0[actions[p]];
            let d = delays[p][t as usize - 1];
            queues[p].enqueue(FeedbackEvent { origin: t, arrival: t + d, loss, action: actions[p] })?;
            let batch = queues[p].drain(t)?;
            let report = learners[p].update(&batch)?;
            let stats = &mut out.players[p];
            stats.discarded += report.rejected as u64;
            stats.violations += report.violations as u64;
            stats.max_ratio = stats.max_ratio.max(report.max_ratio);
            incurred[p] += loss;
            incurred_weighted[p] += e * loss;
            plain[p].add(&lv, 1.0);
            weighted[p].add(&lv, e);
            losses.push(loss);
            missing.push(queues[p].len() as u64);
        }

        erg.eta_sum += e;
        erg.rho[index] += e;
        let have_mixed = mixed.iter().all(|m| !m.is_empty());
        if have_mixed {
            let refs: Vec<&[f64]> = mixed.iter().map(Vec::as_slice).collect();
            for (i, q) in game.product(&refs).iter().enumerate() {
                erg.rho_mixed[i] += e * q;
            }
            for (acc, m) in erg.strategies.iter_mut().zip(&mixed) {
                acc.iter_mut().zip(m).for_each(|(a, q)| *a += e * q);
            }
        } else {
            erg.rho_mixed[index] += e;
            for (acc, &a) in erg.strategies.iter_mut().zip(&actions) {
                acc[a] += e;
            }
        }

        if next_checkpoint.next_if_eq(&t).is_some() {
            let norm = |v: &[f64]| v.iter().map(|x| x / erg.eta_sum).collect::<Vec<f64>>();
            out.checkpoints.push(GameCheckpoint {
                t,
                rho: norm(&erg.rho),
                rho_mixed: norm(&erg.rho_mixed),
                mean_strategies: erg.strategies.iter().map(|s| norm(s)).collect(),
                discounted_ratios: (0..n).map(|p| (incurred_weighted[p] - weighted[p].best()) / erg.eta_sum).collect(),
                regrets: (0..n).map(|p| incurred[p] - plain[p].best()).collect(),
            });
        }
        if record {
            out.trajectory.push(JointRound { t, actions, losses, missing, eta: e });
        }
    }
    for (stats, q) in out.players.iter_mut().zip(&queues) {
        stats.missing = q.len() as u64;
    }
    Ok(out)
}

/// Checkpointed ergodic averages of a convex-concave zero-sum game.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleCheckpoint {
    pub t: u64,
    pub y_bar: Vec<f64>,
    pub z_bar: Vec<f64>,
    pub ne_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleRound {
    pub t: u64,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// `u(y_t, z_t)`, the row player's loss.
    pub value: f64,
    pub missing: [u64; 2],
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleOutcome {
    pub checkpoints: Vec<SaddleCheckpoint>,
    pub trajectory: Vec<SaddleRound>,
}

/// Play a convex-concave zero-sum game: the `y` learner is fed `u`, the
/// `z` learner `1 - u`.
#[allow(clippy::too_many_arguments)]
pub fn play_saddle<Y, Z>(
    game: &ConvexConcaveGame,
    y_learner: &mut Y,
    z_learner: &mut Z,
    delays: [&[u64]; 2],
    eta: &StepSchedule,
    horizon: u64,
    checkpoints: &[u64],
    record: bool,
    rngs: &mut [SimRng; 2],
) -> Result<SaddleOutcome>
where
    Y: DelayedLearner<Action = Vec<f64>>,
    Z: DelayedLearner<Action = Vec<f64>>,
{
    let mut qy = DeliveryQueue::new();
    let mut qz = DeliveryQueue::new();
    let mut y_bar = vec![0.0; game.y_body.dim()];
    let mut z_bar = vec![0.0; game.z_body.dim()];
    let mut eta_sum = 0.0;
    let mut out = SaddleOutcome { checkpoints: Vec::new(), trajectory: Vec::new() };
    let mut next_checkpoint = checkpoints.iter().copied().filter(|&c| c <= horizon).peekable();
    let zs = ZeroSumGame::ConvexConcave(game.clone());
    for t in 1..=horizon {
        let e = eta.at(t);
        if (y_learner.eta(t) - e).abs() > 1e-15 || (z_learner.eta(t) - e).abs() > 1e-15 {
            return Err(Error::Config("players use different step-size schedules".into()));
        }
        let [ry, rz] = rngs;
        let y = y_learner.act(t, ry);
        let z = z_learner.act(t, rz);
        let value = crate::cost::check_range((game.u)(&y, &z), t)?;
        qy.enqueue(FeedbackEvent { origin: t, arrival: t + delays[0][t as usize - 1], loss: value, action: y.clone() })?;
        qz.enqueue(FeedbackEvent { origin: t, arrival: t + delays[1][t as usize - 1], loss: 1.0 - value, action: z.clone() })?;
        y_learner.update(&qy.drain(t)?)?;
        z_learner.update(&qz.drain(t)?)?;
        eta_sum += e;
        y_bar.iter_mut().zip(&y).for_each(|(a, v)| *a += e * v);
        z_bar.iter_mut().zip(&z).for_each(|(a, v)| *a += e * v);
        if next_checkpoint.next_if_eq(&t).is_some() {
            let yb: Vec<f64> = y_bar.iter().map(|v| v / eta_sum).collect();
            let zb: Vec<f64> = z_bar.iter().map(|v| v / eta_sum).collect();
            let ne_gap = ne_gap_zero_sum(&zs, &yb, &zb)?;
            out.checkpoints.push(SaddleCheckpoint { t, y_bar: yb, z_bar: zb, ne_gap });
        }
        if record {
            out.trajectory.push(SaddleRound { t, y, z, value, missing: [qy.len() as u64, qz.len() as u64], eta: e });
        }
    }
    Ok(out)
}

/// Row player pays 1 when the coins match.
pub fn matching_pennies() -> Vec<Vec<f64>> {
    vec![vec![1.0, 0.0], vec![0.0, 1.0]]
}

/// Game of chicken with actions (dare, swerve), payoffs scaled into [0, 1]:
/// both dare 0, a lone darer 1 against 2/7, both swerve 6/7.
pub fn chicken() -> FiniteGame {
    let u1 = vec![vec![0.0, 1.0], vec![2.0 / 7.0, 6.0 / 7.0]];
    let u2 = vec![vec![0.0, 2.0 / 7.0], vec![1.0, 6.0 / 7.0]];
    FiniteGame::bimatrix(&u1, &u2).expect("valid game")
}
