//! Single-cycle entrance probability into the dissipative region, as a
//! function of the starting radius.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result, SplitError};
use crate::euler::{Assumption, EulerSystem};
use crate::rng::{uniform_on_sphere, StreamSeed};
use crate::splitting::{entrance_streaming, sample_cycle, FlowMapId, Splitting};
use crate::stats::Proportion;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntrancePoint {
    /// `H(q) = |q| + 1` of the sampled states.
    pub h: f64,
    pub estimate: Proportion,
    /// `estimate * log H`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntranceScaling {
    pub eta: f64,
    pub mean_duration: f64,
    pub points: Vec<EntrancePoint>,
}

impl EntranceScaling {
    pub fn band_ratio(&self) -> f64 {
        let max = self.points.iter().map(|p| p.scaled).fold(f64::NEG_INFINITY, f64::max);
        let min = self.points.iter().map(|p| p.scaled).fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// For each `H` in `levels`, draws `q` uniformly on `{H(q) = H}` and one
/// cycle, and records whether the cycle first enters `D_η` right before the
/// damping flow. Level `i`, trial `t` uses substream `t` of `seed.child(i)`.
pub fn entrance_scaling(
    sys: &Arc<EulerSystem>,
    levels: &[f64],
    eta: f64,
    h: f64,
    trials: u64,
    seed: StreamSeed,
) -> Result<EntranceScaling> {
    if sys.check_assumption() == Assumption::Neither {
        return Err(SplitError::Precondition("system satisfies neither DF1 nor DF2".into()));
    }
    if trials == 0 || !(eta > 0.0 && eta < 1.0) {
        return invalid("entrance scaling needs trials and eta in (0, 1)");
    }
    let region = sys.dissipative_region(eta);
    let m = sys.num_fields();
    let d = sys.dim();
    let mut points = Vec::with_capacity(levels.len());
    for (i, &level) in levels.iter().enumerate() {
        if !(level > 1.0) {
            return invalid(format!("level H must exceed 1, got {level}"));
        }
        let sub = seed.child(i as u64);
        let hits = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = sub.substream(t);
                let q = uniform_on_sphere(&mut rng, d, level - 1.0);
                let p = sample_cycle(&mut rng, m, h)?;
                entrance_streaming(sys.as_ref(), &q, &p, &region, FlowMapId(0)).map(u64::from)
            })
            .collect::<Result<Vec<u64>>>()?
            .iter()
            .sum();
        let estimate = Proportion::new(hits, trials);
        points.push(EntrancePoint { h: level, estimate, scaled: estimate.estimate * level.ln() });
    }
    Ok(EntranceScaling { eta, mean_duration: h, points })
}
