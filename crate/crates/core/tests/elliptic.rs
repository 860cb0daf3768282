mod common;

use common::*;
use proptest::prelude::*;
use splitflow::elliptic::{self, CnSign, EllipticModulus, MIN_COMPLEMENT};
use splitflow::SplitError;

#[test]
fn quarter_period_matches_quadrature() {
    for rho in [0.0, 0.1, 0.5, 0.9, 0.99] {
        let k = elliptic::quarter_period(rho).unwrap();
        let o = quarter_period_oracle(rho);
        assert!((k - o).abs() < 1e-13 * o, "rho {rho}: {k} vs {o}");
    }
    assert!((elliptic::quarter_period(0.0).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
}

#[test]
fn jacobi_functions_solve_their_ode() {
    for rho in [0.0, 0.3, 0.8, 0.999, 1.0 - 1e-9] {
        let m = EllipticModulus::new(rho).unwrap();
        let rhs = move |y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1] * y[2];
            dy[1] = -y[0] * y[2];
            dy[2] = -rho * y[0] * y[1];
        };
        for x in [0.3, 1.7, 4.0, 9.5] {
            let j = m.jacobi(x);
            let o = ode_oracle(rhs, &[0.0, 1.0, 1.0], x, 1e-13, 1e-15);
            let got = [j.sn, j.cn, j.dn];
            for i in 0..3 {
                assert!((got[i] - o[i]).abs() < 1e-9, "rho {rho} x {x}: {got:?} vs {o:?}");
            }
        }
    }
}

#[test]
fn symmetries() {
    let m = EllipticModulus::new(0.7).unwrap();
    let k = m.quarter_period();
    let at_k = m.jacobi(k);
    assert!((at_k.sn - 1.0).abs() < 1e-15 && at_k.cn.abs() < 1e-15);
    assert!((at_k.dn - m.complement().sqrt()).abs() < 1e-15);
    for x in [0.1, 0.9, 2.3] {
        let a = m.jacobi(x);
        let b = m.jacobi(-x);
        let c = m.jacobi(x + 4.0 * k);
        let d = m.jacobi(x + 2.0 * k);
        assert!((a.sn + b.sn).abs() < 1e-14 && (a.cn - b.cn).abs() < 1e-14);
        assert!((a.sn - c.sn).abs() < 1e-13 && (a.cn - c.cn).abs() < 1e-13);
        assert!((a.sn + d.sn).abs() < 1e-13 && (a.cn + d.cn).abs() < 1e-13 && (a.dn - d.dn).abs() < 1e-13);
    }
}

#[test]
fn incomplete_integral_inverts_sn() {
    let m = EllipticModulus::new(0.6).unwrap();
    for s in [0.0, 0.2, 0.5, 0.95, 1.0] {
        let t = m.incomplete(s).unwrap();
        assert!((m.jacobi(t).sn - s).abs() < 1e-14);
    }
    assert!(m.incomplete(1.5).is_err());
}

#[test]
fn phase_inversion_picks_the_quadrant() {
    let m = EllipticModulus::new(0.9).unwrap();
    let k = m.quarter_period();
    for theta in [0.2, 0.8 * k, 1.3 * k, 2.5 * k, 3.9 * k] {
        let j = m.jacobi(theta);
        let back = m.phase_from_values(j.sn, j.cn).unwrap();
        assert!((back - theta).abs() < 1e-12, "{theta} -> {back}");
        let sign = if j.cn > 0.0 { CnSign::Positive } else { CnSign::Negative };
        let back = m.phase_from_pair(j.sn, sign).unwrap();
        assert!((back - theta).abs() < 1e-10);
    }
    assert!((m.phase_from_pair(1.0, CnSign::Zero).unwrap() - k).abs() < 1e-14);
    assert!(m.phase_from_pair(0.5, CnSign::Zero).is_err());
    assert!(m.phase_from_values(0.0, 0.0).is_err());
}

#[test]
fn degenerate_moduli_are_reported() {
    assert!(EllipticModulus::new(1.0).is_err());
    assert!(EllipticModulus::new(-0.1).is_err());
    assert!(matches!(
        EllipticModulus::from_complement(MIN_COMPLEMENT / 10.0),
        Err(SplitError::DegenerateModulus { .. })
    ));
    let k = EllipticModulus::from_complement(MIN_COMPLEMENT).unwrap().quarter_period();
    assert!(k.is_finite() && k > 30.0);
}

#[test]
fn logarithmic_growth_near_separatrix() {
    // K ~ log(4/sqrt(eps)) as the complement eps -> 0.
    for eps in [1e-6, 1e-10, 1e-16, 1e-22] {
        let k = EllipticModulus::from_complement(eps).unwrap().quarter_period();
        let asym = (4.0 / eps.sqrt()).ln();
        assert!((k - asym).abs() < eps.max(4e-16) * asym, "{eps}: {k} vs {asym}");
    }
}

proptest! {
    #[test]
    fn pythagorean_identities(rho in 0.0f64..0.999_999, x in -50.0f64..50.0) {
        let j = elliptic::jacobi(rho, x).unwrap();
        prop_assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() < 1e-13);
        prop_assert!((j.dn * j.dn - (1.0 - rho * j.sn * j.sn)).abs() < 1e-13);
    }

    #[test]
    fn derivative_identities(rho in 0.0f64..0.99, x in -10.0f64..10.0) {
        let m = EllipticModulus::new(rho).unwrap();
        let h = 1e-5;
        let (p, q, j) = (m.jacobi(x + h), m.jacobi(x - h), m.jacobi(x));
        prop_assert!(((p.sn - q.sn) / (2.0 * h) - j.cn * j.dn).abs() < 1e-6);
        prop_assert!(((p.cn - q.cn) / (2.0 * h) + j.sn * j.dn).abs() < 1e-6);
        prop_assert!(((p.dn - q.dn) / (2.0 * h) + rho * j.sn * j.cn).abs() < 1e-6);
    }

    #[test]
    fn carlson_is_symmetric(x in 0.0f64..5.0, y in 0.01f64..5.0, z in 0.01f64..5.0) {
        let a = elliptic::carlson_rf(x, y, z);
        prop_assert!((a - elliptic::carlson_rf(z, x, y)).abs() < 1e-14 * a);
        prop_assert!((a - elliptic::carlson_rf(y, z, x)).abs() < 1e-14 * a);
    }
}
