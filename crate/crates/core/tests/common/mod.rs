#![allow(dead_code)]

use ode_solvers::{DVector, Dop853, OutputType, System};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitflow::euler::{EulerSystem, LatticeIndex, Part};
use splitflow::Splitting;

pub struct SingleField<'a, S: Splitting + ?Sized> {
    pub s: &'a S,
    pub field: usize,
}

impl<S: Splitting + ?Sized> System<f64, DVector<f64>> for SingleField<'_, S> {
    fn system(&self, _t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let mut out = vec![0.0; y.len()];
        self.s.eval_field(self.field, y.as_slice(), &mut out);
        dy.copy_from_slice(&out);
    }
}

/// Dormand–Prince 8(5,3) solution of one field of a splitting.
pub fn rk_oracle<S: Splitting + ?Sized>(s: &S, field: usize, x0: &[f64], t: f64, rtol: f64) -> Vec<f64> {
    if t == 0.0 {
        return x0.to_vec();
    }
    let scale = x0.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut solver = Dop853::new(
        SingleField { s, field },
        0.0,
        t,
        t,
        DVector::from_column_slice(x0),
        rtol,
        rtol * 1e-3 * scale,
    );
    solver.set_output(OutputType::Sparse);
    solver.integrate().expect("oracle integration");
    solver.y_out().last().unwrap().as_slice().to_vec()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    diff / scale
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Random vector with norm uniform in `(0, max_norm]`.
pub fn random_state(rng: &mut ChaCha8Rng, dim: usize, max_norm: f64) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = norm(&v);
    let r = max_norm * rng.random_range(0.05..1.0);
    v.iter().map(|c| c * r / n).collect()
}

pub fn test_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// N = 4 system under the first damping/forcing hypothesis: modes (1,0),
/// (0,1), (4,4) damped; one forcing field on a_(1,0), one on a_(0,1).
pub fn df1_system() -> EulerSystem {
    let m = LatticeIndex::new;
    EulerSystem::with_sparse_forcing(
        4,
        &[(m(1, 0), 1.0), (m(0, 1), 1.0), (m(4, 4), 1.0)],
        2,
        &[(1, m(1, 0), Part::A, 1.0), (2, m(0, 1), Part::A, 1.0)],
    )
    .unwrap()
}

pub fn conservative_euler(n: usize) -> EulerSystem {
    EulerSystem::new(n, &[], vec![]).unwrap()
}

struct Closure<F>(F);

impl<F: Fn(&[f64], &mut [f64])> System<f64, DVector<f64>> for Closure<F> {
    fn system(&self, _t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let mut out = vec![0.0; y.len()];
        (self.0)(y.as_slice(), &mut out);
        dy.copy_from_slice(&out);
    }
}

/// Dormand–Prince 8(5,3) solution of an arbitrary autonomous system.
pub fn ode_oracle(rhs: impl Fn(&[f64], &mut [f64]), x0: &[f64], t: f64, rtol: f64, atol: f64) -> Vec<f64> {
    if t == 0.0 {
        return x0.to_vec();
    }
    let mut solver = Dop853::new(Closure(rhs), 0.0, t, t, DVector::from_column_slice(x0), rtol, atol);
    solver.set_output(OutputType::Sparse);
    solver.integrate().expect("oracle integration");
    solver.y_out().last().unwrap().as_slice().to_vec()
}

/// `K(rho)` by the trapezoid rule over a full period, which converges
/// geometrically for this smooth periodic integrand.
pub fn quarter_period_oracle(rho: f64) -> f64 {
    let n = 4096;
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let sum: f64 = (0..n).map(|i| 1.0 / (1.0 - rho * (i as f64 * h).sin().powi(2)).sqrt()).sum();
    sum * h / 4.0
}
