use maxrand::analytic::g_bound;
use maxrand::numverify::{
    bipartite_targets, minimize_objective, verify_family, Event, MinimizeOptions, RELATIVE_FLOOR,
};
use maxrand::quantum::born_behavior;
use maxrand::scenario::Scenario;
use maxrand::FamilyKind;

#[test]
fn bipartite_minimum_matches_the_bound_on_a_grid() {
    let opts = MinimizeOptions {
        restarts: 8,
        ..Default::default()
    };
    for i in 0..5 {
        for j in 0..5 {
            let (x, z) = (0.44 + 0.01 * i as f64, 0.44 + 0.01 * j as f64);
            assert!(g_bound(x, z).unwrap() >= 0.0);
            let r = verify_family(FamilyKind::Bipartite, x, z, &opts).unwrap();
            let pred = r.prediction;
            let rel = (r.numeric_minimum - pred).abs() / pred.max(RELATIVE_FLOOR);
            assert!(rel <= 1e-5, "({x}, {z}): {} vs {pred}", r.numeric_minimum);
        }
    }
}

#[test]
fn returned_realization_regenerates_the_constraints() {
    let targets = bipartite_targets(0.47, 0.45);
    let objective = Event::new(&[1, 1], &[0, 0]);
    let opts = MinimizeOptions {
        restarts: 4,
        ..Default::default()
    };
    let m = minimize_objective(Scenario::bipartite(), &targets, &objective, &opts).unwrap();
    let r = &m.realization;
    let b = born_behavior(&r.state().unwrap(), &r.assembly().unwrap()).unwrap();
    for t in &targets {
        let p = b.prob(&t.event.inputs, &t.event.outputs);
        assert!((p - t.value).abs() <= 1e-7, "{t:?}: {p}");
    }
    assert!((b.prob(&[1, 1], &[0, 0]) - m.value).abs() <= 1e-12);
    assert_eq!(m.restarts.len(), 4);
    let best = m
        .restarts
        .iter()
        .filter(|o| o.passed_gate)
        .map(|o| o.value)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(best, m.value);
}

#[test]
fn tripartite_point_with_few_restarts() {
    let opts = MinimizeOptions {
        restarts: 3,
        ..Default::default()
    };
    let r = verify_family(FamilyKind::Tripartite, 0.235, 0.23, &opts).unwrap();
    assert!(r.relative_error <= 1e-5, "{}", r.relative_error);
    assert_eq!(r.constraints.len(), 32);
    let json = r.to_json();
    assert_eq!(json["objective"]["inputs"], "2,1,2");
    assert_eq!(json["seed"], 42);
}

#[test]
fn best_value_is_monotone_in_restarts() {
    let targets = bipartite_targets(0.46, 0.44);
    let objective = Event::new(&[1, 1], &[0, 0]);
    let mut prev = f64::INFINITY;
    for restarts in [1, 2, 4] {
        let opts = MinimizeOptions {
            restarts,
            ..Default::default()
        };
        let v = minimize_objective(Scenario::bipartite(), &targets, &objective, &opts)
            .unwrap()
            .value;
        assert!(v <= prev);
        prev = v;
    }
}
