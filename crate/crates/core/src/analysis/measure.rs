//! Time averages along a single trajectory.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rng::ChainRng;
use crate::splitting::{step_in_place, Splitting};

/// `μ_n(G(H) > R)` against the bound `(H(x) + f)/R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tightness {
    pub threshold: f64,
    pub fraction_above: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    pub n: usize,
    /// Averages over `X_0..X_{n-1}`, one per observable.
    pub averages: Vec<f64>,
    pub first_half: Vec<f64>,
    pub second_half: Vec<f64>,
    /// Values of the first observable, kept for the tightness diagnostic.
    #[serde(skip)]
    first_values: Vec<f64>,
}

impl EmpiricalMeasure {
    /// Fraction of `X_0..X_{n-1}` with `g(obs_0) > threshold`, where `obs_0`
    /// is the first observable (normally `H`).
    pub fn tightness(&self, g: impl Fn(f64) -> f64, f: f64, threshold: f64) -> Tightness {
        let above = self.first_values.iter().filter(|v| g(**v) > threshold).count();
        let h0 = self.first_values.first().copied().unwrap_or(0.0);
        Tightness { threshold, fraction_above: above as f64 / self.n as f64, bound: (h0 + f) / threshold }
    }
}

pub fn empirical_measure<S: Splitting + ?Sized>(
    s: &S,
    x: &[f64],
    n: usize,
    h: f64,
    rng: &mut ChainRng,
    observables: &[&dyn Fn(&[f64]) -> f64],
) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return invalid("empirical measure needs n >= 1");
    }
    let mut sums = vec![vec![0.0; observables.len()]; 2];
    let mut first_values = Vec::with_capacity(if observables.is_empty() { 0 } else { n });
    let mut cur = x.to_vec();
    let split = n / 2;
    for k in 0..n {
        for (i, obs) in observables.iter().enumerate() {
            let v = obs(&cur);
            sums[usize::from(k >= split)][i] += v;
            if i == 0 {
                first_values.push(v);
            }
        }
        if k + 1 < n {
            step_in_place(s, &mut cur, rng, h)?;
        }
    }
    let avg = |v: &[f64], c: usize| v.iter().map(|s| s / c.max(1) as f64).collect::<Vec<_>>();
    let total: Vec<f64> = sums[0].iter().zip(&sums[1]).map(|(a, b)| a + b).collect();
    Ok(EmpiricalMeasure {
        n,
        averages: avg(&total, n),
        first_half: avg(&sums[0], split),
        second_half: avg(&sums[1], n - split),
        first_values,
    })
}
