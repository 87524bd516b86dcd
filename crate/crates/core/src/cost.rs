//! Loss functions chosen by the adversary, the best-fixed-action comparators
//! used for regret, and the adversary itself.

use std::fmt;
use std::sync::Arc;

use crate::body::{dot, ConvexBody};
use crate::error::{Error, Result};

pub trait Cost {
    type Action;
    fn value(&self, action: &Self::Action) -> f64;

    /// Expected loss under a mixed strategy, where that makes sense.
    fn expected(&self, _distribution: &[f64]) -> Option<f64> {
        None
    }

    /// Range check of the whole cost function, where it is cheap.
    fn validate(&self, _round: u64) -> Result<()> {
        Ok(())
    }
}

/// Full loss vector over `K` arms for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmLosses(pub Vec<f64>);

impl Cost for ArmLosses {
    type Action = usize;
    fn value(&self, arm: &usize) -> f64 {
        self.0[*arm]
    }

    fn expected(&self, p: &[f64]) -> Option<f64> {
        Some(dot(&self.0, p))
    }

    fn validate(&self, round: u64) -> Result<()> {
        match self.0.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            Some(&value) => Err(Error::CostOutOfRange { round, value }),
            None => Ok(()),
        }
    }
}

pub type LossFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ConvexLoss {
    /// `scale * |x - center|^2 + offset`
    Quadratic { scale: f64, center: Vec<f64>, offset: f64 },
    /// `<grad, x> + offset`
    Linear { grad: Vec<f64>, offset: f64 },
    Custom(LossFn),
}

impl fmt::Debug for ConvexLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quadratic { scale, center, offset } => {
                write!(f, "Quadratic({scale} |x - {center:?}|^2 + {offset})")
            }
            Self::Linear { grad, offset } => write!(f, "Linear({grad:?}, {offset})"),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl Cost for ConvexLoss {
    type Action = Vec<f64>;
    fn value(&self, x: &Vec<f64>) -> f64 {
        self.eval(x)
    }
}

impl ConvexLoss {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Quadratic { scale, center, offset } => {
                scale * x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() + offset
            }
            Self::Linear { grad, offset } => dot(grad, x) + offset,
            Self::Custom(f) => f(x),
        }
    }
}

pub fn check_range(value: f64, round: u64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::CostOutOfRange { round, value })
    }
}

/// Accumulates weighted losses and reports the best fixed action.
pub trait Comparator<C> {
    fn add(&mut self, cost: &C, weight: f64);
    fn best(&self) -> f64;
}

#[derive(Debug, Clone)]
pub struct ArmComparator {
    pub totals: Vec<f64>,
}

impl ArmComparator {
    pub fn new(arms: usize) -> Self {
        Self { totals: vec![0.0; arms] }
    }

    /// Best arm; ties go to the lowest index.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.totals.iter().enumerate() {
            if v < self.totals[best] {
                best = i;
            }
        }
        best
    }
}

impl Comparator<ArmLosses> for ArmComparator {
    fn add(&mut self, cost: &ArmLosses, weight: f64) {
        for (t, l) in self.totals.iter_mut().zip(&cost.0) {
            *t += weight * l;
        }
    }

    fn best(&self) -> f64 {
        self.totals[self.argmin()]
    }
}

/// Exact comparator for sums of isotropic quadratics and linear losses,
/// falling back to a grid once a custom loss shows up.
#[derive(Clone)]
pub struct ConvexComparator {
    body: ConvexBody,
    quad: f64,
    lin: Vec<f64>,
    constant: f64,
    grid: Option<(Vec<Vec<f64>>, Vec<f64>)>,
}

impl ConvexComparator {
    pub fn new(body: ConvexBody) -> Self {
        let n = body.dim();
        Self { body, quad: 0.0, lin: vec![0.0; n], constant: 0.0, grid: None }
    }

    fn grid_per_dim(dim: usize) -> usize {
        match dim {
            1 => 10_000,
            2 => 1_000,
            _ => 40,
        }
    }

    fn analytic(&self, x: &[f64]) -> f64 {
        self.quad * dot(x, x) + dot(&self.lin, x) + self.constant
    }

    /// Best fixed point and its cumulative loss.
    pub fn argmin(&self) -> (Vec<f64>, f64) {
        if let Some((points, sums)) = &self.grid {
            let (i, v) = points
                .iter()
                .zip(sums)
                .map(|(p, s)| self.analytic(p) + s)
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
            return (points[i].clone(), v);
        }
        let x = if self.quad > 0.0 {
            let mut x0: Vec<f64> = self.lin.iter().map(|g| -g / (2.0 * self.quad)).collect();
            self.body.project(&mut x0);
            x0
        } else {
            self.body.argmin_linear(&self.lin)
        };
        let v = self.analytic(&x);
        (x, v)
    }
}

impl Comparator<ConvexLoss> for ConvexComparator {
    fn add(&mut self, cost: &ConvexLoss, w: f64) {
        match cost {
            ConvexLoss::Quadratic { scale, center, offset } => {
                self.quad += w * scale;
                for (l, c) in self.lin.iter_mut().zip(center) {
                    *l -= 2.0 * w * scale * c;
                }
                self.constant += w * (scale * dot(center, center) + offset);
            }
            ConvexLoss::Linear { grad, offset } => {
                for (l, g) in self.lin.iter_mut().zip(grad) {
                    *l += w * g;
                }
                self.constant += w * offset;
            }
            ConvexLoss::Custom(f) => {
                let body = &self.body;
                let (points, sums) = self.grid.get_or_insert_with(|| {
                    let points = body.grid(Self::grid_per_dim(body.dim()));
                    let sums = vec![0.0; points.len()];
                    (points, sums)
                });
                for (p, s) in points.iter().zip(sums.iter_mut()) {
                    *s += w * f(p);
                }
            }
        }
    }

    fn best(&self) -> f64 {
        self.argmin().1
    }
}

/// Realised regret against the best fixed action in hindsight.
pub fn regret<C, K: Comparator<C>>(actions: &[C::Action], costs: &[C], mut comparator: K) -> f64
where
    C: Cost,
{
    let incurred: f64 = actions.iter().zip(costs).map(|(a, c)| c.value(a)).sum();
    costs.iter().for_each(|c| comparator.add(c, 1.0));
    incurred - comparator.best()
}

/// `sum_t eta_t (l_t(a_t) - l_t(a*)) / sum_t eta_t` where `a*` minimises the
/// eta-weighted cumulative loss.
pub fn discounted_regret_ratio<C, K: Comparator<C>>(
    actions: &[C::Action],
    costs: &[C],
    etas: &[f64],
    mut comparator: K,
) -> f64
where
    C: Cost,
{
    let incurred: f64 = actions.iter().zip(costs).zip(etas).map(|((a, c), e)| e * c.value(a)).sum();
    costs.iter().zip(etas).for_each(|(c, &e)| comparator.add(c, e));
    (incurred - comparator.best()) / etas.iter().sum::<f64>()
}

pub type ObliviousFn<C> = Box<dyn FnMut(u64) -> C + Send>;
pub type AdaptiveFn<A, C> = Box<dyn FnMut(u64, &[A]) -> C + Send>;

/// The loss sequence. An oblivious adversary never sees the learner's
/// actions; an adaptive one sees every action played before the round.
pub enum Adversary<A, C> {
    Oblivious(ObliviousFn<C>),
    Adaptive(AdaptiveFn<A, C>),
}

impl<A, C> Adversary<A, C> {
    pub fn cost(&mut self, round: u64, history: &[A]) -> C {
        match self {
            Adversary::Oblivious(f) => f(round),
            Adversary::Adaptive(f) => f(round, history),
        }
    }

    pub fn is_oblivious(&self) -> bool {
        matches!(self, Adversary::Oblivious(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regret_ties_to_lowest_index() {
        let costs = vec![ArmLosses(vec![1.0, 0.0]), ArmLosses(vec![0.0, 1.0]), ArmLosses(vec![0.5, 0.5])];
        let c = costs.iter().fold(ArmComparator::new(2), |mut c, l| {
            c.add(l, 1.0);
            c
        });
        assert_eq!(c.argmin(), 0);
        assert_eq!(regret(&[1, 1, 0], &costs, ArmComparator::new(2)), 0.0);
        assert_eq!(regret(&[0, 1, 0], &costs, ArmComparator::new(2)), 1.0);
    }

    #[test]
    fn discounted_ratio_worked_example() {
        // T = 3, eta = (1, 1/2, 1/4), arm 0 loses (0, 1, 1), arm 1 loses (1, 0, 0),
        // the learner always plays arm 1: a* = arm 0 with weighted loss 3/4,
        // learner 1, ratio (1 - 3/4) / (7/4)
        let costs = vec![ArmLosses(vec![0.0, 1.0]), ArmLosses(vec![1.0, 0.0]), ArmLosses(vec![1.0, 0.0])];
        let r = discounted_regret_ratio(&[1, 1, 1], &costs, &[1.0, 0.5, 0.25], ArmComparator::new(2));
        assert!((r - 1.0 / 7.0).abs() < 1e-12);
        // beating the comparator gives a negative ratio
        let r = discounted_regret_ratio(&[0, 1, 0], &costs, &[1.0, 0.5, 0.25], ArmComparator::new(2));
        assert!((r - (0.25 - 0.75) / 1.75).abs() < 1e-12);
    }

    #[test]
    fn discounted_ratio_two_rounds() {
        let costs = vec![ArmLosses(vec![0.0, 1.0]), ArmLosses(vec![1.0, 0.0])];
        let r = discounted_regret_ratio(&[1, 0], &costs, &[1.0, 0.5], ArmComparator::new(2));
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn convex_comparator_matches_grid() {
        let ball = ConvexBody::ball(1, 1.0).unwrap();
        let losses = vec![
            ConvexLoss::Quadratic { scale: 0.25, center: vec![0.4], offset: 0.1 },
            ConvexLoss::Linear { grad: vec![0.3], offset: 0.2 },
            ConvexLoss::Quadratic { scale: 0.1, center: vec![-2.0], offset: 0.0 },
        ];
        let mut exact = ConvexComparator::new(ball.clone());
        let mut grid = ConvexComparator::new(ball);
        for l in &losses {
            exact.add(l, 1.0);
            let l = l.clone();
            grid.add(&ConvexLoss::Custom(Arc::new(move |x| l.eval(x))), 1.0);
        }
        let (xe, ve) = exact.argmin();
        let (xg, vg) = grid.argmin();
        assert!((ve - vg).abs() < 1e-6, "{ve} {vg}");
        assert!((xe[0] - xg[0]).abs() < 1e-3);
        // linear only: a vertex of the ball
        let mut lin = ConvexComparator::new(ConvexBody::ball(2, 1.0).unwrap());
        lin.add(&ConvexLoss::Linear { grad: vec![3.0, 4.0], offset: 0.0 }, 1.0);
        let (x, v) = lin.argmin();
        assert!((x[0] + 0.6).abs() < 1e-12 && (v + 5.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_cost_is_an_error() {
        assert!(ArmLosses(vec![0.2, 1.2]).validate(4).is_err());
        assert!(check_range(-0.1, 1).is_err());
        assert_eq!(check_range(0.3, 1), Ok(0.3));
    }
}
