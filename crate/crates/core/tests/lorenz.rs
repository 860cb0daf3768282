mod common;

use common::{norm, random_state, test_rng};
use proptest::prelude::*;
use splitflow::lorenz96::{h_star_valid, in_dissipative_region, lyapunov_h, LadderConfig, Lorenz96System};
use splitflow::rng::uniform_on_sphere;
use splitflow::{Splitting, StreamSeed};

fn state(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, d)
}

proptest! {
    #[test]
    fn rotations_are_isometries(x in state(6), i in 0usize..6, t in -20.0..20.0f64) {
        let sys = Lorenz96System::uniform(6, 1.0).unwrap();
        let mut y = x.clone();
        sys.flow(i, &mut y, t).unwrap();
        prop_assert!((norm(&y) - norm(&x)).abs() <= 1e-12 * norm(&x).max(1.0));
        // Only the rotated pair moves.
        for k in (0..6).filter(|&k| k != i && k != (i + 1) % 6) {
            prop_assert_eq!(y[k], x[k]);
        }
    }

    #[test]
    fn star_flow_grows_at_most_linearly(x in state(5), t in 0.0..10.0f64, b in 0.1..3.0f64) {
        let sys = Lorenz96System::uniform(5, b).unwrap();
        let mut y = x.clone();
        sys.flow(sys.star(), &mut y, t).unwrap();
        prop_assert!(lyapunov_h(&y) <= lyapunov_h(&x) + sys.beta_norm() * t + 1e-9 * lyapunov_h(&x));
    }

    #[test]
    fn star_field_energy_balance(x in state(5)) {
        let sys = Lorenz96System::new(vec![1.0, -2.0, 0.5, 3.0, -1.0]).unwrap();
        let mut f = vec![0.0; 5];
        sys.eval_field(sys.star(), &x, &mut f);
        let power: f64 = f.iter().zip(&x).map(|(a, b)| a * b).sum();
        let expected = -x[0] * x[0] + sys.beta().iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((power - expected).abs() <= 1e-10 * (1.0 + x.iter().map(|v| v * v).sum::<f64>()));
    }

    #[test]
    fn rotation_fields_do_no_work(x in state(7), i in 0usize..7) {
        let sys = Lorenz96System::uniform(7, 1.0).unwrap();
        let mut f = vec![0.0; 7];
        sys.eval_field(i, &x, &mut f);
        let power: f64 = f.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!(power.abs() <= 1e-10 * (1.0 + norm(&x).powi(3)));
    }

    #[test]
    fn ladder_covers_large_states(seed in 0u64..10_000, scale in 1.0..50.0f64, d in 4usize..8) {
        let ladder = LadderConfig::new(d, 0.05, (d as f64).sqrt()).unwrap();
        let x = uniform_on_sphere(&mut StreamSeed(seed).substream(0), d, scale * ladder.r_star());
        prop_assert!(ladder.region_index(&x).is_some());
    }
}

#[test]
fn dissipative_region_is_a_cone() {
    assert!(in_dissipative_region(&[1.0, 1.0, 0.0, 0.0], 0.49));
    assert!(!in_dissipative_region(&[1.0, 1.0, 0.1, 0.0], 0.5));
    assert!(in_dissipative_region(&[0.0; 4], 0.9));
    let region = Lorenz96System::dissipative_region(0.25);
    assert!(region.contains(&[1.0, 1.0, 1.0, 1.0]));
    assert!(region.contains(&[-1.0, 1.0, 1.0, 1.0]));
    assert!(!region.contains(&[0.9, 1.0, 1.0, 1.0]));
}

#[test]
fn ladder_radii() {
    let ladder = LadderConfig::new(4, 0.1, 2.0).unwrap();
    assert!((ladder.r(0) - 0.5).abs() < 1e-15);
    for j in 1..4 {
        assert!((ladder.r(j) / ladder.r(j - 1) - 0.1 / 16.0).abs() < 1e-13);
    }
    let outer = 2f64.powi(9) * 2.0 / ladder.r(3);
    assert!((ladder.outer_radius() / outer - 1.0).abs() < 1e-12);
    assert!((ladder.r_star() / (8.0 * outer + 1.0) - 1.0).abs() < 1e-12);
    assert!(LadderConfig::new(3, 0.1, 1.0).is_err());
    assert!(LadderConfig::new(13, 0.1, 1.0).is_err());
}

#[test]
fn ladder_regions_follow_the_leading_mode() {
    let ladder = LadderConfig::new(5, 0.1, 1.0).unwrap();
    let big = 4.0 * ladder.outer_radius();
    let x = [big, 0.0, 0.0, 0.0, 0.0];
    assert_eq!(ladder.region_index(&x), Some(1));
    // Energy concentrated in mode 2, mode 1 tiny: second region.
    let y = [0.0, big, 0.0, 0.0, 0.0];
    assert!(!ladder.in_region(&y, 1));
    assert!(ladder.in_region(&y, 2));
    assert_eq!(ladder.region_index(&[0.0; 5]), None);
    assert_eq!(ladder.region_index(&[1.0, 0.0, 0.0, 0.0, 0.0]), None);
}

#[test]
fn step_size_conditions() {
    assert!(h_star_valid(0.01));
    assert!(h_star_valid(0.03));
    assert!(!h_star_valid(0.3));
    assert!(!h_star_valid(0.0));
    assert!(!h_star_valid(-0.01));
}

#[test]
fn splitting_sums_to_drift_at_example_state() {
    let sys = Lorenz96System::uniform(4, 8.0).unwrap();
    let x = [1.0, 2.0, 3.0, 4.0];
    let mut full = [0.0; 4];
    sys.drift(&x, &mut full);
    // (x_{i+1} - x_{i-2}) x_{i-1} - [i = 0] x_0 + 8, indices mod 4.
    assert_eq!(full, [(2.0 - 3.0) * 4.0 - 1.0 + 8.0, (3.0 - 4.0) * 1.0 + 8.0, (4.0 - 1.0) * 2.0 + 8.0, (1.0 - 2.0) * 3.0 + 8.0]);
    let mut rng = test_rng(9);
    for _ in 0..50 {
        let x = random_state(&mut rng, 4, 10.0);
        let (mut sum, mut tmp) = ([0.0; 4], [0.0; 4]);
        for f in 0..sys.num_fields() {
            sys.eval_field(f, &x, &mut tmp);
            sum.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);
        }
        sys.drift(&x, &mut full);
        assert!(common::rel_err(&sum, &full) < 1e-13);
    }
}

#[test]
fn invalid_systems_are_rejected() {
    assert!(Lorenz96System::uniform(3, 1.0).is_err());
    assert!(Lorenz96System::new(vec![1.0, 0.0, 1.0, 1.0]).is_err());
    assert!(Lorenz96System::new(vec![1.0, f64::NAN, 1.0, 1.0]).is_err());
}

#[test]
fn chain_energy_is_maintained_from_rest() {
    // The forcing pumps energy in, the damping on mode 1 caps it: starting
    // from rest the chain neither stays at rest nor blows up.
    let sys = Lorenz96System::uniform(4, 1.0).unwrap();
    let mut rng = StreamSeed(4).substream(0);
    let mut x = vec![0.0; 4];
    let mut sum = 0.0;
    for _ in 0..20_000 {
        splitflow::splitting::step_in_place(&sys, &mut x, &mut rng, 0.5).unwrap();
        sum += lyapunov_h(&x);
    }
    let avg = sum / 20_000.0;
    assert!(avg > 1.5 && avg < 1e3, "time-averaged H = {avg}");
}
