//! Monte Carlo estimates of `E_x[H(X_n)]` and the affine bound
//! `E_x[H(X_n)] <= α H(x) + f` fitted over a range of radii.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result, SplitError};
use crate::rng::StreamSeed;
use crate::splitting::{step_in_place, Splitting};
use crate::stats::MeanEstimate;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub x: Vec<f64>,
    pub h_x: f64,
    pub n_steps: usize,
    pub trials: u64,
    /// `H(X_n)` over the trials that did not overflow.
    pub mean: MeanEstimate,
    /// Trials dropped because a flow overflowed.
    pub overflowed: u64,
}

impl DriftReport {
    /// Upper end of a one-sided confidence bound on the mean, with normal
    /// quantile `z`.
    pub fn upper(&self, z: f64) -> f64 {
        self.mean.mean + z * self.mean.std_err
    }
}

/// Runs `trials` independent chains of `n_steps` from `x`; trial `i` draws
/// from substream `i` of `seed`.
pub fn estimate_drift<S, L>(
    s: &S,
    x: &[f64],
    n_steps: usize,
    h: f64,
    trials: u64,
    seed: StreamSeed,
    lyapunov: L,
) -> Result<DriftReport>
where
    S: Splitting + ?Sized,
    L: Fn(&[f64]) -> f64 + Sync,
{
    if trials < 100 {
        return invalid(format!("drift estimates need at least 100 trials, got {trials}"));
    }
    let outcomes: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.substream(i);
            let mut cur = x.to_vec();
            for _ in 0..n_steps {
                match step_in_place(s, &mut cur, &mut rng, h) {
                    Ok(_) => {}
                    Err(SplitError::NumericOverflow { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(Some(lyapunov(&cur)))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = outcomes.iter().flatten().copied().collect();
    Ok(DriftReport {
        x: x.to_vec(),
        h_x: lyapunov(x),
        n_steps,
        trials,
        mean: MeanEstimate::from_samples(&values),
        overflowed: trials - values.len() as u64,
    })
}

/// Least-squares line `E[H(X_n)] ≈ α H(x) + f` with `f >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftFit {
    pub alpha: f64,
    pub f: f64,
    /// Standard error of `alpha` propagated from the per-radius standard
    /// errors.
    pub alpha_std_err: f64,
    /// Largest `E[H(X_n)] - (α H(x) + f)` over the fitted points.
    pub max_violation: f64,
}

impl DriftFit {
    /// Smallest intercept with `α H(x) + f` above every fitted point.
    pub fn dominating_f(&self) -> f64 {
        self.f + self.max_violation.max(0.0)
    }

    /// `2 f / (1 - α)` with the dominating intercept, beyond which the
    /// drift contracts at rate at least `(1 - α)/2`.
    pub fn sublevel_radius(&self) -> Option<f64> {
        (self.alpha < 1.0).then(|| 2.0 * self.dominating_f() / (1.0 - self.alpha))
    }
}

pub fn fit_drift(reports: &[DriftReport]) -> Result<DriftFit> {
    if reports.len() < 2 {
        return invalid("a drift fit needs at least two radii");
    }
    let xs: Vec<f64> = reports.iter().map(|r| r.h_x).collect();
    let ys: Vec<f64> = reports.iter().map(|r| r.mean.mean).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return invalid("drift fit needs distinct radii");
    }
    // alpha = Σ w_i y_i for either branch; the weights drive error propagation.
    let (alpha, f, weights): (f64, f64, Vec<f64>) = {
        let w: Vec<f64> = xs.iter().map(|x| (x - mx) / sxx).collect();
        let alpha = w.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>();
        let f = my - alpha * mx;
        if f >= 0.0 {
            (alpha, f, w)
        } else {
            let sq: f64 = xs.iter().map(|x| x * x).sum();
            let w: Vec<f64> = xs.iter().map(|x| x / sq).collect();
            (w.iter().zip(&ys).map(|(w, y)| w * y).sum(), 0.0, w)
        }
    };
    let alpha_std_err = weights.iter().zip(reports).map(|(w, r)| (w * r.mean.std_err).powi(2)).sum::<f64>().sqrt();
    let max_violation = xs.iter().zip(&ys).map(|(x, y)| y - (alpha * x + f)).fold(f64::NEG_INFINITY, f64::max);
    Ok(DriftFit { alpha, f, alpha_std_err, max_violation })
}
