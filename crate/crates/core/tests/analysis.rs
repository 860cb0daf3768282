mod common;

use proptest::prelude::*;
use splitflow::analysis::{
    empirical_measure, estimate_drift, fit_drift, return_time_samples, thermalization_scan, AssumptionMargins,
    RateFunctions, RateKind,
};
use splitflow::euler::{LatticeIndex, TriadGeometry};
use splitflow::lorenz96::{lyapunov_h, Lorenz96System};
use splitflow::StreamSeed;

fn rates() -> impl Strategy<Value = RateFunctions> {
    prop_oneof![
        (0.01..2.0f64, 0.1..1.0f64).prop_map(|(al, a)| RateFunctions::power(al, a).unwrap()),
        (0.01..2.0f64).prop_map(|al| RateFunctions::power(al, 1.0).unwrap()),
        (0.01..2.0f64).prop_map(|al| RateFunctions::stretch(al).unwrap()),
    ]
}

/// `∫_1^t ds/G(s)` by composite Simpson on a log grid.
fn k_oracle(r: &RateFunctions, t: f64) -> f64 {
    let n = 20_000;
    let (a, b) = (0.0, t.ln());
    let h = (b - a) / n as f64;
    let f = |u: f64| u.exp() / r.g(u.exp());
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k_matches_quadrature(r in rates(), t in 1.0..1e4f64) {
        let k = r.k(t);
        prop_assert!((k - k_oracle(&r, t)).abs() <= 1e-8 * k.abs().max(1.0));
    }

    #[test]
    fn k_inv_inverts_k(r in rates(), s in 0.0..20.0f64) {
        let t = r.k_inv(s);
        prop_assume!(t.is_finite() && t < 1e200);
        prop_assert!(t >= 1.0);
        prop_assert!((r.k(t) - s).abs() <= 1e-9 * s.max(1.0));
    }

    #[test]
    fn r_is_derivative_of_k_inv(r in rates(), s in 0.1..10.0f64) {
        let h = 1e-5 * s;
        let fd = (r.k_inv(s + h) - r.k_inv(s - h)) / (2.0 * h);
        prop_assume!(fd.is_finite() && fd < 1e100);
        prop_assert!((fd - r.r(s)).abs() <= 1e-6 * r.r(s).max(1.0));
    }

    #[test]
    fn tail_bound_decreases(r in rates(), hx in 1.0..1e3f64, n in 0.0..50.0f64) {
        prop_assert!(r.tail_bound(hx, n + 1.0) <= r.tail_bound(hx, n));
    }
}

#[test]
fn numeric_rate_matches_closed_form() {
    let closed = RateFunctions::power(0.3, 0.5).unwrap();
    let grid: Vec<f64> = (0..40).map(|i| 1.0 + i as f64 * 10.0).collect();
    let numeric = RateFunctions::numeric(|t| 0.3 * t.sqrt(), &grid).unwrap();
    assert_eq!(numeric.kind(), RateKind::Numeric);
    for t in [1.0, 2.0, 17.5, 300.0] {
        assert!((numeric.k(t) - closed.k(t)).abs() < 1e-9 * closed.k(t).max(1.0));
    }
    for s in [0.0, 1.0, 10.0] {
        assert!((numeric.k_inv(s) - closed.k_inv(s)).abs() < 1e-8 * closed.k_inv(s));
        assert!((numeric.r(s) - closed.r(s)).abs() < 1e-8 * closed.r(s));
    }
}

#[test]
fn numeric_rate_rejects_bad_drift_functions() {
    let grid = [1.0, 2.0, 4.0, 8.0];
    assert!(RateFunctions::numeric(|t| t * t, &grid).is_err());
    assert!(RateFunctions::numeric(|t| 1.0 / t, &grid).is_err());
    assert!(RateFunctions::numeric(|_| -1.0, &grid).is_err());
    assert!(RateFunctions::numeric(|t| t.sqrt(), &[0.5, 1.0, 2.0]).is_err());
    assert!(RateFunctions::power(0.0, 0.5).is_err());
    assert!(RateFunctions::power(1.0, 1.5).is_err());
    assert!(RateFunctions::stretch(-1.0).is_err());
}

#[test]
fn drift_contracts_at_large_radius() {
    let sys = Lorenz96System::uniform(4, 1.0).unwrap();
    let x = [0.0, 0.0, 0.0, 999.0];
    let rep = estimate_drift(&sys, &x, 5, 0.05, 2000, StreamSeed(3), lyapunov_h).unwrap();
    assert_eq!(rep.overflowed, 0);
    assert!(rep.upper(2.33) < rep.h_x);
    assert!(estimate_drift(&sys, &x, 5, 0.05, 10, StreamSeed(3), lyapunov_h).is_err());
}

#[test]
fn drift_fit_over_radii_is_contracting() {
    let sys = Lorenz96System::uniform(4, 1.0).unwrap();
    let reports: Vec<_> = [100.0, 1000.0, 10000.0]
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let x = splitflow::rng::uniform_on_sphere(&mut StreamSeed(5).child(i as u64).substream(0), 4, r);
            estimate_drift(&sys, &x, 5, 0.05, 2000, StreamSeed(6).child(i as u64), lyapunov_h).unwrap()
        })
        .collect();
    let fit = fit_drift(&reports).unwrap();
    assert!(fit.alpha < 1.0 && fit.alpha > 0.5, "alpha = {}", fit.alpha);
    assert!(fit.f >= 0.0);
}

#[test]
fn return_times_inside_and_far() {
    let sys = Lorenz96System::uniform(4, 1.0).unwrap();
    let inside = return_time_samples(&sys, &[1.0, 0.0, 0.0, 0.0], 10.0, 0.05, 100, 50, StreamSeed(1), lyapunov_h).unwrap();
    assert!(inside.samples.iter().all(|s| *s == Some(0)));
    let far = return_time_samples(&sys, &[100.0, 0.0, 0.0, 0.0], 10.0, 0.05, 3, 50, StreamSeed(1), lyapunov_h).unwrap();
    assert_eq!(far.censored(), 50);
    assert_eq!(far.survival(3), 1.0);
    let reached = return_time_samples(&sys, &[100.0, 0.0, 0.0, 0.0], 50.0, 0.5, 100_000, 200, StreamSeed(2), lyapunov_h).unwrap();
    assert_eq!(reached.censored(), 0);
    assert!(reached.quantile(0.5) > 0);
    let rate = RateFunctions::power(0.01, 1.0).unwrap();
    assert!(reached.weighted_moment(&rate).mean > 0.0);
}

#[test]
fn empirical_measure_halves_and_tightness() {
    let sys = Lorenz96System::uniform(4, 1.0).unwrap();
    let mut rng = StreamSeed(11).substream(0);
    let h = |x: &[f64]| lyapunov_h(x);
    let one = |_: &[f64]| 1.0;
    let m = empirical_measure(&sys, &[3.0, 0.0, 0.0, 0.0], 1000, 0.5, &mut rng, &[&h, &one]).unwrap();
    assert_eq!(m.averages[1], 1.0);
    assert_eq!(m.first_half[1], 1.0);
    assert!(((m.first_half[0] + m.second_half[0]) / 2.0 - m.averages[0]).abs() < 1e-9 * m.averages[0]);
    let t = m.tightness(|v| v, 5.0, 1e9);
    assert_eq!(t.fraction_above, 0.0);
    assert!(t.bound > 0.0);
    assert!(empirical_measure(&sys, &[0.0; 4], 0, 0.5, &mut rng, &[&h]).is_err());
}

#[test]
fn thermalization_is_deterministic_in_seed() {
    let g = TriadGeometry::new(LatticeIndex::new(1, 0), LatticeIndex::new(1, 1)).unwrap();
    let m = AssumptionMargins { xi: 0.5, zeta: 0.1 };
    let run = |seed| {
        thermalization_scan(&g, |d| splitflow::analysis::state_with_gap(&g, 0.99, 0.4, 0.101 * d * d), m, 0.1, 0.6, &[1e-2, 1e-3], 2000, StreamSeed(seed))
            .unwrap()
    };
    assert_eq!(run(1), run(1));
    let a = run(1);
    assert!(a.points.iter().all(|p| p.estimate.successes > 0));
    assert!(a.band_ratio() >= 1.0);
}
