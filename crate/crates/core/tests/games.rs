use lagbandit::cost::{Adversary, ArmComparator, ArmLosses};
use lagbandit::delay::DelaySchedule;
use lagbandit::exp3::{Exp3, GammaMode};
use lagbandit::experiment::{execute, resolve, ExperimentKind, GameSpec, RunConfig, Seeds};
use lagbandit::game::{cce_gap, chicken, discounted_ergodic_distribution, ne_gap_zero_sum, play_finite, FiniteGame, ZeroSumGame};
use lagbandit::rng::{substream, Stream};
use lagbandit::sim::{run, RunOptions};
use lagbandit::step::StepSchedule;
use proptest::prelude::*;

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum::<f64>() + 1e-9;
        v.iter().map(|x| (x + 1e-9 / v.len() as f64) / s).collect()
    })
}

fn matrix_and_strategies() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (2usize..5, 2usize..5).prop_flat_map(|(m, n)| {
        (prop::collection::vec(prop::collection::vec(0.0f64..=1.0, n), m), simplex(m), simplex(n))
    })
}

proptest! {
    #[test]
    fn ergodic_distribution_is_normalised_on_played_profiles(
        played in prop::collection::vec(0usize..6, 1..300),
        seed_etas in prop::collection::vec(1e-6f64..1.0, 300),
    ) {
        let rho = discounted_ergodic_distribution(&played, &seed_etas, 6);
        prop_assert!((rho.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (a, r) in rho.iter().enumerate() {
            prop_assert_eq!(*r > 0.0, played.contains(&a));
        }
    }

    #[test]
    fn product_distributions_have_equal_cce_and_ne_gaps((u, y, z) in matrix_and_strategies()) {
        let zs = ZeroSumGame::Matrix(u);
        let game = zs.to_finite().unwrap();
        let rho = game.product(&[&y, &z]);
        let cce = cce_gap(&rho, &game).unwrap();
        let ne = ne_gap_zero_sum(&zs, &y, &z).unwrap();
        prop_assert!((cce - ne).abs() < 1e-9, "{cce} vs {ne}");
    }
}

#[test]
fn one_player_game_is_the_single_agent_loop() {
    let losses = [0.2, 0.7, 0.5];
    let game = FiniteGame::new(vec![3], vec![losses.iter().map(|l| 1.0 - l).collect()]).unwrap();
    let horizon = 3000;
    let delays: Vec<u64> = (1..=horizon).map(|t| 1 + t % 7).collect();
    let eta = StepSchedule::power_log(1.0, 0.625).capped_for_exp3();

    let mut learners = vec![Exp3::new(3, eta.clone(), GammaMode::EqualEta).unwrap()];
    let mut rngs = vec![substream(5, Stream::Learner)];
    let joint = play_finite(&game, &mut learners, std::slice::from_ref(&delays), &eta, horizon, &[horizon], true, &mut rngs).unwrap();

    let mut single = Exp3::new(3, eta, GammaMode::EqualEta).unwrap();
    let table = losses.to_vec();
    let mut adv: Adversary<usize, ArmLosses> = Adversary::Oblivious(Box::new(move |_| ArmLosses(table.clone())));
    let mut rng = substream(5, Stream::Learner);
    let opts = RunOptions { checkpoints: vec![horizon], record: true };
    let out = run(&mut single, &mut adv, ArmComparator::new(3), &delays, horizon, &opts, &mut rng).unwrap();

    for (j, s) in joint.trajectory.iter().zip(&out.trajectory) {
        assert_eq!(j.actions[0], s.action);
        assert!((j.losses[0] - s.loss).abs() < 1e-15);
    }
    let cp = &joint.checkpoints[0];
    assert!((cp.regrets[0] - out.regret).abs() < 1e-9);
    assert!((cp.discounted_ratios[0] - out.discounted_ratio).abs() < 1e-9);
}

#[test]
fn indicator_and_probability_weights_agree_in_expectation() {
    let game = chicken();
    let horizon = 1000;
    let eta = StepSchedule::power_log(1.0, 0.625).capped_for_exp3();
    let delays: Vec<u64> = (1..=horizon).map(|t| (t as f64).powf(0.25).ceil() as u64).collect();
    let seeds = 200;
    let mut diffs = vec![Vec::new(); game.profiles()];
    for seed in 0..seeds {
        let mut learners: Vec<Exp3> = (0..2).map(|_| Exp3::new(2, eta.clone(), GammaMode::EqualEta).unwrap()).collect();
        let mut rngs: Vec<_> = (0..2).map(|p| substream(seed, Stream::Player(p))).collect();
        let out = play_finite(&game, &mut learners, &[delays.clone(), delays.clone()], &eta, horizon, &[horizon], false, &mut rngs).unwrap();
        let cp = &out.checkpoints[0];
        for (a, d) in diffs.iter_mut().enumerate() {
            d.push(cp.rho[a] - cp.rho_mixed[a]);
        }
    }
    for (a, d) in diffs.iter().enumerate() {
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let se = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        assert!(mean.abs() <= 3.0 * se + 1e-12, "profile {a}: {mean} vs 3 se {}", 3.0 * se);
    }
}

#[test]
fn cce_gap_is_bounded_by_discounted_regret() {
    let config = RunConfig {
        kind: ExperimentKind::FiniteGameCce,
        horizon: 20_000,
        seeds: Seeds { count: 20, root: 3 },
        delay: DelaySchedule::PowerLaw { alpha: 0.25 },
        column_delay: None,
        algorithm: lagbandit::experiment::AlgorithmSpec { auto_clamp: true, ..Default::default() },
        adversary: None,
        game: Some(GameSpec::Chicken),
        checkpoints: vec![1000, 5000],
        trajectories: false,
        thin: false,
        output: "unused".into(),
    };
    let report = execute(&resolve(&config).unwrap()).unwrap();
    for row in &report.gaps {
        let ratio = row.max_ratio.unwrap();
        let se = (row.gap_std_err.powi(2) + row.max_ratio_std_err.unwrap().powi(2)).sqrt();
        assert!(row.gap <= ratio + 3.0 * se, "t = {}: gap {} ratio {ratio} se {se}", row.t, row.gap);
    }
}
