use lagbandit::experiment::acceptance::stability_stress_only;

#[test]
fn stress_runs_are_stable() {
    let r = stability_stress_only(2, false).unwrap();
    assert!(r.passed, "{r}");
}

#[test]
fn sabotaged_filter_turns_the_criterion_red() {
    let r = stability_stress_only(2, true).unwrap();
    assert!(!r.passed, "{r}");
}
