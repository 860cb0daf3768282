//! Probability that a single triad flow, run for an exponential time, ends
//! with all three coordinates bounded away from zero.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result, SplitError};
use crate::euler::triad::{conserved_pair_geom, TriadGeometry, TriadOrbit};
use crate::numerics::diff_of_weighted_squares;
use crate::rng::{exponential, StreamSeed};
use crate::stats::Proportion;

/// Margins `ξ <= ℰ <= 1` and `ζ` keeping the data off the separatrix
/// (`|E - ℰ/|k|^2| >= ζ δ^2`) and off the outer equilibria
/// (`E - ℰ/|l|^2 >= ζ` on one side, `ℰ/|j|^2 - E >= ζ` on the other).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionMargins {
    pub xi: f64,
    pub zeta: f64,
}

/// Checks the margins for the rescaled state `start` at scale `delta`.
pub fn check_margins(g: &TriadGeometry, start: [f64; 3], delta: f64, m: AssumptionMargins) -> Result<()> {
    let fail = |what: String| Err(SplitError::Precondition(what));
    if g.nj2 >= g.nk2 {
        return fail("margins need |j| < |k|".into());
    }
    let zeta_max = 0.5 * g.a().min(g.b());
    if !(m.zeta > 0.0 && m.zeta < zeta_max) {
        return fail(format!("zeta = {} outside (0, {zeta_max})", m.zeta));
    }
    if !(m.xi > 0.0 && m.xi < 1.0) {
        return fail(format!("xi = {} outside (0, 1)", m.xi));
    }
    let [x, y, z] = start;
    let (_, enstrophy) = conserved_pair_geom(g, start);
    if enstrophy < m.xi || enstrophy > 1.0 {
        return fail(format!("enstrophy margin: {enstrophy} not in [{}, 1]", m.xi));
    }
    let gap = diff_of_weighted_squares(g.a(), z, g.b(), x);
    let inner = m.zeta * delta * delta;
    if gap >= inner {
        let outer = g.c() * x * x + g.a() * y * y;
        if outer < m.zeta {
            return fail(format!("outer energy margin: E - enstrophy/|l|^2 = {outer} < zeta"));
        }
        Ok(())
    } else if gap <= -inner {
        let outer = g.b() * y * y + g.c() * z * z;
        if outer < m.zeta {
            return fail(format!("outer energy margin: enstrophy/|j|^2 - E = {outer} < zeta"));
        }
        Ok(())
    } else {
        fail(format!("interface margin: |E - enstrophy/|k|^2| = {} < zeta delta^2 = {inner}", gap.abs()))
    }
}

/// A state with `x, z >= 0`, the given `y`, enstrophy `enstrophy` and gap
/// `ℰ/|k|^2 - E = gap`.
pub fn state_with_gap(g: &TriadGeometry, enstrophy: f64, y: f64, gap: f64) -> Result<[f64; 3]> {
    let (a, b) = (g.a(), g.b());
    let rest = enstrophy - y * y;
    let x2 = (a * rest - gap) / (a + b);
    let z2 = (b * rest + gap) / (a + b);
    if !(x2 >= 0.0 && z2 >= 0.0) {
        return invalid("no real state with the requested invariants");
    }
    Ok([x2.sqrt(), y, z2.sqrt()])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalizationPoint {
    pub delta: f64,
    pub start: [f64; 3],
    pub estimate: Proportion,
    /// `estimate * |log δ|`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalizationScan {
    pub eta: f64,
    pub h: f64,
    pub points: Vec<ThermalizationPoint>,
    /// Smallest `estimate * |log δ|` over the grid.
    pub fitted_c: f64,
}

impl ThermalizationScan {
    /// `max / min` of `estimate * |log δ|` over the grid.
    pub fn band_ratio(&self) -> f64 {
        let max = self.points.iter().map(|p| p.scaled).fold(f64::NEG_INFINITY, f64::max);
        max / self.fitted_c
    }
}

/// For each `δ`, draws `τ ~ exp(mean h)` and checks whether
/// `min(|x_τ|, |y_τ|, |z_τ|) >= η` along the rescaled flow started at
/// `family(δ)`. Grid point `i` uses `seed.child(i)`.
#[allow(clippy::too_many_arguments)]
pub fn thermalization_scan<F>(
    g: &TriadGeometry,
    family: F,
    margins: AssumptionMargins,
    eta: f64,
    h: f64,
    deltas: &[f64],
    trials: u64,
    seed: StreamSeed,
) -> Result<ThermalizationScan>
where
    F: Fn(f64) -> Result<[f64; 3]>,
{
    if trials == 0 || deltas.is_empty() {
        return invalid("thermalization scan needs trials and a delta grid");
    }
    if !(h > 0.0) || !(eta > 0.0) {
        return invalid("thermalization scan needs h > 0 and eta > 0");
    }
    let mut points = Vec::with_capacity(deltas.len());
    for (i, &delta) in deltas.iter().enumerate() {
        if !(delta > 0.0 && delta < 1.0) {
            return invalid(format!("delta must lie in (0, 1), got {delta}"));
        }
        let start = family(delta)?;
        check_margins(g, start, delta, margins)?;
        let orbit = TriadOrbit::new(g, start)?;
        let sub = seed.child(i as u64);
        let hits: u64 = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = sub.substream(t);
                let tau = exponential(&mut rng, h);
                let s = orbit.eval_rescaled(tau, delta);
                u64::from(s.iter().all(|v| v.abs() >= eta))
            })
            .sum();
        let estimate = Proportion::new(hits, trials);
        points.push(ThermalizationPoint { delta, start, estimate, scaled: estimate.estimate * delta.ln().abs() });
    }
    let fitted_c = points.iter().map(|p| p.scaled).fold(f64::INFINITY, f64::min);
    Ok(ThermalizationScan { eta, h, points, fitted_c })
}
