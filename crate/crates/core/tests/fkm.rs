use lagbandit::body::{norm, ConvexBody};
use lagbandit::delay::DelaySchedule;
use lagbandit::experiment::{execute, resolve, ExperimentKind, RunConfig, Seeds};
use lagbandit::fkm::Fkm;
use lagbandit::learner::DelayedLearner;
use lagbandit::queue::{DeliveryQueue, FeedbackEvent};
use lagbandit::rng::{substream, Stream};
use lagbandit::step::StepSchedule;
use proptest::prelude::*;
use rand::Rng;

fn bodies() -> Vec<ConvexBody> {
    let mut out = Vec::new();
    for n in [1, 2, 5] {
        out.push(ConvexBody::ball(n, 1.0).unwrap());
        out.push(ConvexBody::ball(n, 3.0).unwrap());
        out.push(ConvexBody::cube(n, 1.0).unwrap());
    }
    out
}

#[test]
fn iterates_and_plays_stay_feasible() {
    let steps = 100_000 / bodies().len() as u64 + 1;
    for (i, body) in bodies().into_iter().enumerate() {
        let mut rng = substream(i as u64, Stream::Learner);
        let mut adv = substream(i as u64, Stream::Adversary);
        let delta = 0.05 + 0.9 * adv.random::<f64>();
        // large steps push the iterate against the boundary
        let mut fkm = Fkm::new(body.clone(), delta, StepSchedule::fixed(0.5)).unwrap();
        let mut q = DeliveryQueue::new();
        for t in 1..=steps {
            let a = fkm.act(t, &mut rng);
            assert!(body.contains(&a, 1e-9), "{body:?} round {t}: play {a:?}");
            let d = adv.random_range(1..=20);
            q.enqueue(FeedbackEvent { origin: t, arrival: t + d, loss: adv.random::<f64>(), action: a }).unwrap();
            fkm.update(&q.drain(t).unwrap()).unwrap();
            let x = fkm.iterate().to_vec();
            let mut shrunk = x.clone();
            body.project_shrunk(&mut shrunk, delta);
            assert!(norm(&x.iter().zip(&shrunk).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-12, "{body:?}: {x:?} outside the shrunk body");
        }
    }
}

fn body_and_points() -> impl Strategy<Value = (ConvexBody, Vec<f64>, Vec<f64>)> {
    (0usize..9).prop_flat_map(|i| {
        let body = bodies()[i].clone();
        let n = body.dim();
        (Just(body), prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(-10.0f64..10.0, n))
    })
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_non_expansive((body, y, z) in body_and_points(), delta in 0.0f64..0.9) {
        let (mut py, mut pz) = (y.clone(), z.clone());
        body.project_shrunk(&mut py, delta);
        body.project_shrunk(&mut pz, delta);
        let mut again = py.clone();
        body.project_shrunk(&mut again, delta);
        prop_assert!(norm(&py.iter().zip(&again).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-12);
        let before = norm(&y.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>());
        let after = norm(&py.iter().zip(&pz).map(|(a, b)| a - b).collect::<Vec<_>>());
        prop_assert!(after <= before + 1e-12);
    }
}

/// The construction switches losses at `T / 2`, so each horizon is its own run.
#[test]
fn linear_delays_give_linear_regret_but_vanishing_discounted_regret() {
    let mut ratios = Vec::new();
    for e in [12, 14, 16] {
        let horizon = 1u64 << e;
        let config = RunConfig {
            kind: ExperimentKind::Proposition1,
            horizon,
            seeds: Seeds { count: 8, root: 11 },
            delay: DelaySchedule::Linear,
            column_delay: None,
            algorithm: Default::default(),
            adversary: None,
            game: None,
            checkpoints: vec![horizon],
            trajectories: false,
            thin: false,
            output: "unused".into(),
        };
        let res = resolve(&config).unwrap();
        let body = res.body.clone().unwrap();
        let last = execute(&res).unwrap().summary.last().unwrap().clone();
        ratios.push(last.discounted_ratio);
        if e == 16 {
            let floor = 1.0 / (4.0 * (body.diameter() + 1.0).powi(2));
            assert!(last.mean_regret / horizon as f64 >= floor, "regret / T = {}", last.mean_regret / horizon as f64);
        }
    }
    assert!(ratios.iter().all(|&r| r < 0.2), "{ratios:?}");
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}
