//! Rate functions derived from a concave drift function `G`:
//! `K(t) = ∫_1^t ds / G(s)`, its inverse, and `r = (K^{-1})' = G ∘ K^{-1}`.

use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numerics::{bracketed_root, integrate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RateKind {
    /// `G(t) = α t^a`.
    Power { alpha: f64, a: f64 },
    /// `G(t) = α (t + e^2) / log(t + e^2)`.
    Stretch { alpha: f64 },
    Numeric,
}

#[derive(Clone)]
pub struct RateFunctions {
    kind: RateKind,
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for RateFunctions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RateFunctions").field("kind", &self.kind).finish()
    }
}

const QUAD_TOL: f64 = 1e-13;

impl RateFunctions {
    pub fn power(alpha: f64, a: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() || !(a > 0.0 && a <= 1.0) {
            return invalid(format!("power rate needs alpha > 0 and a in (0, 1], got ({alpha}, {a})"));
        }
        Ok(RateFunctions { kind: RateKind::Power { alpha, a }, g: Arc::new(move |t: f64| alpha * t.powf(a)) })
    }

    pub fn stretch(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return invalid(format!("stretch rate needs alpha > 0, got {alpha}"));
        }
        let e2 = E * E;
        Ok(RateFunctions { kind: RateKind::Stretch { alpha }, g: Arc::new(move |t: f64| alpha * (t + e2) / (t + e2).ln()) })
    }

    /// Rate functions of an arbitrary `G`, checked to be positive,
    /// nondecreasing and concave on `grid` (points in `[1, ∞)`).
    pub fn numeric(g: impl Fn(f64) -> f64 + Send + Sync + 'static, grid: &[f64]) -> Result<Self> {
        let mut pts: Vec<f64> = grid.to_vec();
        pts.sort_by(f64::total_cmp);
        if pts.len() < 3 || pts[0] < 1.0 {
            return invalid("numeric rate needs at least three grid points in [1, inf)");
        }
        let vals: Vec<f64> = pts.iter().map(|&t| g(t)).collect();
        if vals.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return invalid("G must be positive and finite on the grid");
        }
        for w in 0..pts.len() - 1 {
            if vals[w + 1] < vals[w] * (1.0 - 1e-12) {
                return invalid(format!("G decreases between {} and {}", pts[w], pts[w + 1]));
            }
        }
        for w in 0..pts.len() - 2 {
            let (t0, t1, t2) = (pts[w], pts[w + 1], pts[w + 2]);
            let chord = vals[w] + (vals[w + 2] - vals[w]) * (t1 - t0) / (t2 - t0);
            if vals[w + 1] < chord - 1e-10 * chord.abs().max(1.0) {
                return invalid(format!("G is not concave near t = {t1}"));
            }
        }
        Ok(RateFunctions { kind: RateKind::Numeric, g: Arc::new(g) })
    }

    pub fn kind(&self) -> RateKind {
        self.kind
    }

    pub fn g(&self, t: f64) -> f64 {
        (self.g)(t)
    }

    /// `K(t)` for `t >= 1`.
    pub fn k(&self, t: f64) -> f64 {
        match self.kind {
            RateKind::Power { alpha, a } if a == 1.0 => t.ln() / alpha,
            RateKind::Power { alpha, a } => (t.powf(1.0 - a) - 1.0) / (alpha * (1.0 - a)),
            RateKind::Stretch { alpha } => {
                let e2 = E * E;
                ((t + e2).ln().powi(2) - (1.0 + e2).ln().powi(2)) / (2.0 * alpha)
            }
            RateKind::Numeric => {
                let g = self.g.clone();
                integrate(move |s| 1.0 / g(s), 1.0, t, QUAD_TOL)
            }
        }
    }

    /// `K^{-1}(s)` for `s >= 0`.
    pub fn k_inv(&self, s: f64) -> f64 {
        match self.kind {
            RateKind::Power { alpha, a } if a == 1.0 => (alpha * s).exp(),
            RateKind::Power { alpha, a } => (alpha * (1.0 - a) * s + 1.0).powf(1.0 / (1.0 - a)),
            RateKind::Stretch { alpha } => {
                let e2 = E * E;
                (2.0 * alpha * s + (1.0 + e2).ln().powi(2)).sqrt().exp() - e2
            }
            RateKind::Numeric => {
                if s <= 0.0 {
                    return 1.0;
                }
                let mut hi = 2.0;
                while self.k(hi) < s {
                    hi *= 2.0;
                    if !hi.is_finite() {
                        return f64::INFINITY;
                    }
                }
                bracketed_root(|t| self.k(t) - s, 1.0, hi, 1e-15).unwrap_or(f64::NAN)
            }
        }
    }

    /// `r(s) = G(K^{-1}(s))`.
    pub fn r(&self, s: f64) -> f64 {
        match self.kind {
            RateKind::Power { alpha, a } if a == 1.0 => alpha * (alpha * s).exp(),
            RateKind::Power { alpha, a } => alpha * (alpha * (1.0 - a) * s + 1.0).powf(a / (1.0 - a)),
            RateKind::Stretch { alpha } => {
                let e2 = E * E;
                let root = (2.0 * alpha * s + (1.0 + e2).ln().powi(2)).sqrt();
                alpha * root.exp() / root
            }
            RateKind::Numeric => self.g(self.k_inv(s)),
        }
    }

    /// Tail bound `(H(x) + 1) / K^{-1}(n)` on `P(T_R >= n + 1)`.
    pub fn tail_bound(&self, h_x: f64, n: f64) -> f64 {
        (h_x + 1.0) / self.k_inv(n)
    }
}
