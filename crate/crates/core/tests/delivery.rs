use lagbandit::cost::{Adversary, ArmComparator, ArmLosses};
use lagbandit::delay::{effective_delay_sum, missing_set, received_delay_sum, DelaySchedule};
use lagbandit::exp3::{Exp3, GammaMode};
use lagbandit::queue::{DeliveryQueue, FeedbackEvent};
use lagbandit::rng::{substream, Stream};
use lagbandit::sim::{run, RunOptions};
use lagbandit::step::StepSchedule;
use proptest::prelude::*;
use rand::Rng;

fn schedule() -> impl Strategy<Value = DelaySchedule> {
    prop_oneof![
        (1u64..30).prop_map(|delay| DelaySchedule::Constant { delay }),
        (0.0f64..1.3).prop_map(|alpha| DelaySchedule::PowerLaw { alpha }),
        Just(DelaySchedule::Linear),
        Just(DelaySchedule::LinearLog),
        (1u64..100, any::<u64>()).prop_map(|(max, seed)| DelaySchedule::RandomBounded { max, seed }),
        prop::collection::vec(1u64..50, 300).prop_map(|delays| DelaySchedule::ExplicitList { delays }),
    ]
}

proptest! {
    #[test]
    fn every_round_is_delivered_once_or_missing(s in schedule(), horizon in 1u64..300) {
        let delays = s.realize(horizon).unwrap();
        let mut q = DeliveryQueue::new();
        let mut seen = vec![0u32; horizon as usize + 1];
        for t in 1..=horizon {
            q.enqueue(FeedbackEvent { origin: t, arrival: t + delays[t as usize - 1], loss: 0.5, action: () }).unwrap();
            for e in q.drain(t).unwrap() {
                prop_assert_eq!(e.arrival, t);
                prop_assert_eq!(e.origin + delays[e.origin as usize - 1], t);
                seen[e.origin as usize] += 1;
            }
        }
        let missing = missing_set(&delays, horizon);
        for &m in &missing {
            seen[m as usize] += 1;
        }
        prop_assert!(seen[1..].iter().all(|&c| c == 1));
        prop_assert_eq!(q.len(), missing.len());
    }

    #[test]
    fn effective_sum_splits_into_received_and_missing(s in schedule(), horizon in 1u64..300) {
        let delays = s.realize(horizon).unwrap();
        let tail: u64 = missing_set(&delays, horizon).iter().map(|&t| horizon - t + 1).sum();
        prop_assert_eq!(received_delay_sum(&delays, horizon) + tail, effective_delay_sum(&delays, horizon));
    }

    #[test]
    fn learner_seed_does_not_move_oblivious_costs(a in any::<u64>(), b in any::<u64>()) {
        let horizon = 200u64;
        let mut adv_rng = substream(7, Stream::Adversary);
        let costs: Vec<Vec<f64>> = (0..horizon).map(|_| (0..3).map(|_| adv_rng.random::<f64>()).collect()).collect();
        let mut seen = Vec::new();
        for seed in [a, b] {
            let table = costs.clone();
            let log = std::sync::Arc::new(std::sync::Mutex::new(Vec::new()));
            let sink = log.clone();
            let mut adv: Adversary<usize, ArmLosses> = Adversary::Oblivious(Box::new(move |t| {
                let c = table[t as usize - 1].clone();
                sink.lock().unwrap().push(c.clone());
                ArmLosses(c)
            }));
            let mut e = Exp3::new(3, StepSchedule::fixed(0.03), GammaMode::Zero).unwrap();
            let mut rng = substream(seed, Stream::Learner);
            run(&mut e, &mut adv, ArmComparator::new(3), &[2; 200], horizon, &RunOptions::default(), &mut rng).unwrap();
            seen.push(log.lock().unwrap().clone());
        }
        prop_assert_eq!(&seen[0], &seen[1]);
        prop_assert_eq!(&seen[0], &costs);
    }
}
