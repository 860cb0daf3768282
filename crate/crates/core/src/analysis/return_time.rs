//! Return times `T_R = min{n >= 0 : H(X_n) <= R}` to a sublevel set.

use rayon::prelude::*;
use serde::Serialize;

use super::rate::RateFunctions;
use crate::error::{invalid, Result};
use crate::rng::StreamSeed;
use crate::splitting::{step_in_place, Splitting};
use crate::stats::MeanEstimate;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnTimes {
    /// One entry per trial; `None` when the trial hit `max_steps` first.
    pub samples: Vec<Option<u64>>,
    pub max_steps: u64,
    pub h_x: f64,
    pub radius: f64,
}

impl ReturnTimes {
    pub fn censored(&self) -> usize {
        self.samples.iter().filter(|s| s.is_none()).count()
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored() as f64 / self.samples.len().max(1) as f64
    }

    /// Empirical `P(T_R >= n)`. Censored trials count as `T_R >= max_steps`,
    /// so the curve is a lower bound beyond that point.
    pub fn survival(&self, n: u64) -> f64 {
        let hits = self.samples.iter().filter(|s| s.map_or(true, |t| t >= n)).count();
        hits as f64 / self.samples.len().max(1) as f64
    }

    /// Empirical `q`-quantile, censored trials treated as `max_steps`.
    pub fn quantile(&self, q: f64) -> u64 {
        let mut v: Vec<u64> = self.samples.iter().map(|s| s.unwrap_or(self.max_steps)).collect();
        v.sort_unstable();
        if v.is_empty() {
            return 0;
        }
        let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
        v[idx]
    }

    /// `Σ_{k < T_R} r(k)` averaged over uncensored trials.
    pub fn weighted_moment(&self, rate: &RateFunctions) -> MeanEstimate {
        let vals: Vec<f64> = self.samples.iter().flatten().map(|&t| (0..t).map(|k| rate.r(k as f64)).sum()).collect();
        MeanEstimate::from_samples(&vals)
    }

    /// Largest `survival(n + 1) - bound(n)` for `n` up to the `q`-quantile,
    /// with `bound(n) = (H(x) + 1)/K^{-1}(n)`. Non-positive means the tail is
    /// dominated.
    pub fn worst_tail_excess(&self, rate: &RateFunctions, q: f64) -> f64 {
        let upto = self.quantile(q);
        let mut sorted: Vec<u64> = self.samples.iter().map(|s| s.unwrap_or(self.max_steps)).collect();
        sorted.sort_unstable();
        let total = sorted.len() as f64;
        (0..=upto)
            .map(|n| {
                let at_least = sorted.len() - sorted.partition_point(|&t| t < n + 1);
                at_least as f64 / total - rate.tail_bound(self.h_x, n as f64)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Samples of `T_R` from `x`, one chain per trial (substream `i` of `seed`).
#[allow(clippy::too_many_arguments)]
pub fn return_time_samples<S, L>(
    s: &S,
    x: &[f64],
    radius: f64,
    h: f64,
    max_steps: u64,
    trials: u64,
    seed: StreamSeed,
    lyapunov: L,
) -> Result<ReturnTimes>
where
    S: Splitting + ?Sized,
    L: Fn(&[f64]) -> f64 + Sync,
{
    if trials == 0 {
        return invalid("at least one trial is required");
    }
    let h_x = lyapunov(x);
    let samples = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.substream(i);
            let mut cur = x.to_vec();
            let mut n = 0u64;
            while lyapunov(&cur) > radius {
                if n == max_steps {
                    return Ok(None);
                }
                step_in_place(s, &mut cur, &mut rng, h)?;
                n += 1;
            }
            Ok(Some(n))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReturnTimes { samples, max_steps, h_x, radius })
}
