use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use unidisc::bounds::{epsilon_floor, t_min, t_min_bounded, t_min_onesided, t_perfect, ErrorBudget, ErrorMode};
use unidisc::Error;

fn mode_strategy() -> impl Strategy<Value = ErrorMode> {
    prop_oneof![Just(ErrorMode::BoundedError), Just(ErrorMode::OneSidedError)]
}

fn report(theta: f64, epsilon: f64, mode: ErrorMode) -> unidisc::bounds::BoundReport {
    t_min(theta, ErrorBudget::new(epsilon, mode).unwrap()).unwrap()
}

fn eps_max(mode: ErrorMode) -> f64 {
    match mode {
        ErrorMode::BoundedError => 0.5,
        ErrorMode::OneSidedError => 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1024))]

    #[test]
    fn floor_round_trips(theta in 1e-3..(TAU - 1e-3), t in 0u64..200, mode in mode_strategy()) {
        let eps = epsilon_floor(theta, t, mode).unwrap();
        prop_assert!((0.0..=eps_max(mode)).contains(&eps));
        let r = report(theta, eps, mode);
        prop_assert!(r.raw_value <= t as f64 + 1e-6, "raw {} at t {}", r.raw_value, t);
    }

    #[test]
    fn t_lower_non_increasing_in_epsilon(theta in 1e-3..(TAU - 1e-3), a in 0.0..1.0f64, b in 0.0..1.0f64, mode in mode_strategy()) {
        let (lo, hi) = (a.min(b) * eps_max(mode), a.max(b) * eps_max(mode));
        prop_assert!(report(theta, hi, mode).t_lower <= report(theta, lo, mode).t_lower);
    }

    #[test]
    fn t_lower_non_increasing_in_theta(a in 1e-3..(TAU - 1e-3), b in 1e-3..(TAU - 1e-3), e in 0.0..1.0f64, mode in mode_strategy()) {
        let eps = e * eps_max(mode);
        let (small, large) = (a.min(b), a.max(b));
        prop_assert!(report(large, eps, mode).t_lower <= report(small, eps, mode).t_lower);
    }

    #[test]
    fn lower_bound_never_exceeds_perfect_count(theta in 1e-9..=PI) {
        prop_assert!(t_min_bounded(theta, 0.0).unwrap().t_lower <= t_perfect(theta).unwrap());
        prop_assert!(t_min_onesided(theta, 0.0).unwrap().t_lower <= t_perfect(theta).unwrap());
    }

    #[test]
    fn t_lower_is_ceiling_of_raw(theta in 1e-3..(TAU - 1e-3), e in 0.0..1.0f64, mode in mode_strategy()) {
        let r = report(theta, e * eps_max(mode), mode);
        prop_assert!(r.t_lower as f64 >= r.raw_value - 1e-9);
        prop_assert!((r.t_lower as f64) < r.raw_value - 1e-9 + 1.0);
    }
}

#[test]
fn radical_simplifies_on_dense_grid() {
    let n = 100_000;
    for i in 0..=n {
        let eps = 0.5 * i as f64 / n as f64;
        let linear = 1.0 - 2.0 * eps;
        assert!((1.0 - 4.0 * eps * (1.0 - eps) - linear * linear).abs() <= 1e-12, "eps {eps}");
    }
    let n = 10_000;
    for i in 0..=n {
        let eps = 0.5 * i as f64 / n as f64;
        let radical = (1.0 - 4.0 * eps * (1.0 - eps)).max(0.0).sqrt();
        assert!((radical - (1.0 - 2.0 * eps)).abs() <= 1e-12, "eps {eps}");
    }
}

#[test]
fn hand_fixtures() {
    assert_eq!(t_min_bounded(0.1, 0.25).unwrap().t_lower, 10);
    assert_eq!(t_min_onesided(0.2, 0.6).unwrap().t_lower, 8);
    assert_eq!(t_min_bounded(PI / 4.0, 0.0).unwrap().t_lower, 3);
    assert_eq!(t_perfect(PI / 4.0).unwrap(), 4);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(matches!(t_min_bounded(0.0, 0.1), Err(Error::Indistinguishable { .. })));
    assert!(matches!(t_min_bounded(1.0, 0.6), Err(Error::Domain(_))));
    assert!(matches!(t_min_onesided(1.0, -0.1), Err(Error::Domain(_))));
    assert!(matches!(t_perfect(TAU), Err(Error::Domain(_))));
    assert!(matches!(t_perfect(f64::NAN), Err(Error::Domain(_))));
}
