use lagbandit_demo::{doubling_trace, exp3_regret, zero_sum_gap};

#[test]
fn regret_curve_stays_under_its_bound() {
    let pts = exp3_regret(4, 20_000, 4, 0.0, 1).unwrap();
    assert_eq!(pts.last().unwrap().t, 20_000);
    assert!(pts.iter().all(|p| p.regret <= p.bound), "{pts:?}");
}

#[test]
fn gap_curve_ends_small() {
    let pts = zero_sum_gap(30_000, 0.25, 2).unwrap();
    assert!(pts.last().unwrap().gap < 0.2, "{:?}", pts.last());
}

#[test]
fn trace_records_restarts() {
    let tr = doubling_trace(5000, 30, 3).unwrap();
    assert!(!tr.restarts.is_empty());
    assert!(tr.points.windows(2).all(|w| w[0].t < w[1].t && w[0].nu <= w[1].nu));
}

#[test]
fn bad_horizons_are_rejected() {
    assert!(exp3_regret(2, 10, 1, 0.0, 0).is_err());
    assert!(doubling_trace(u64::MAX, 1, 0).is_err());
}
