//! Estimators with confidence intervals for Monte Carlo output.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A binomial proportion with its 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    /// Normal-approximation halfwidth, `1.96 * sqrt(p(1-p)/n)`.
    pub halfwidth: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        let n = trials.max(1) as f64;
        let p = successes as f64 / n;
        Proportion { successes, trials, estimate: p, halfwidth: Z95 * (p * (1.0 - p) / n).sqrt() }
    }

    /// Standard error of the estimate.
    pub fn sigma(&self) -> f64 {
        let n = self.trials.max(1) as f64;
        (self.estimate * (1.0 - self.estimate) / n).sqrt()
    }

    /// Wilson score interval.
    pub fn wilson(&self) -> (f64, f64) {
        let n = self.trials.max(1) as f64;
        let p = self.estimate;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        let lo = if self.successes == 0 { 0.0 } else { (center - half).max(0.0) };
        let hi = if self.successes == self.trials { 1.0 } else { (center + half).min(1.0) };
        (lo, hi)
    }

    /// 95% interval: normal approximation, switching to Wilson when fewer
    /// than five successes or failures were seen.
    pub fn interval(&self) -> (f64, f64) {
        let failures = self.trials - self.successes;
        if self.successes < 5 || failures < 5 {
            self.wilson()
        } else {
            ((self.estimate - self.halfwidth).max(0.0), (self.estimate + self.halfwidth).min(1.0))
        }
    }
}

/// Sample mean with standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
}

impl MeanEstimate {
    /// Two-pass estimate over the samples in the given order, so the result
    /// depends only on the sample sequence.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return MeanEstimate { mean: f64::NAN, std_err: f64::NAN, count: 0 };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        MeanEstimate { mean, std_err: (var / n as f64).sqrt(), count: n }
    }

    pub fn halfwidth(&self) -> f64 {
        Z95 * self.std_err
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportion_intervals() {
        let p = Proportion::new(0, 100);
        assert_eq!(p.estimate, 0.0);
        assert_eq!(p.halfwidth, 0.0);
        let (lo, hi) = p.interval();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let p = Proportion::new(500, 1000);
        assert!((p.halfwidth - Z95 * 0.5 / 1000f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mean_of_constant_samples() {
        let m = MeanEstimate::from_samples(&[2.0; 10]);
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.std_err, 0.0);
    }
}
