//! The random splitting chain: one step draws a uniform ordering of the
//! fields and an exponential duration for each, then composes the exact
//! flows in that order.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SplitError};
use crate::rng::{exponential, uniform_index, StreamSeed};
use crate::stats::Proportion;

/// States whose norm exceeds this are reported as overflow.
pub const OVERFLOW_NORM: f64 = 1e300;

/// A point of phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        StateVector(vec![0.0; dim])
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for StateVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(v: Vec<f64>) -> Self {
        StateVector(v)
    }
}

/// Euclidean norm, scaled so it does not overflow before the true value does.
pub fn norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale) * (v / scale)).sum::<f64>().sqrt()
}

/// Index of a field within a splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowMapId(pub usize);

/// A decomposition `V = V_0 + ... + V_{m-1}` into fields with exact flows.
pub trait Splitting: Send + Sync {
    fn dim(&self) -> usize;

    fn num_fields(&self) -> usize;

    /// Replaces `x` by the time-`t` flow of field `field`.
    fn flow(&self, field: usize, x: &mut [f64], t: f64) -> Result<()>;

    /// Writes `V_field(x)` into `out`.
    fn eval_field(&self, field: usize, x: &[f64], out: &mut [f64]);

    /// Writes the full drift `V(x)` into `out`, computed independently of
    /// the individual fields.
    fn drift(&self, x: &[f64], out: &mut [f64]);

    fn field_label(&self, field: usize) -> String {
        format!("V{field}")
    }
}

/// The randomness consumed by one step: the order in which fields are
/// applied and how long each one runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleProgram {
    pub sigma: Vec<usize>,
    pub tau: Vec<f64>,
}

impl CycleProgram {
    pub fn new(sigma: Vec<usize>, tau: Vec<f64>) -> Result<Self> {
        let m = sigma.len();
        if tau.len() != m {
            return invalid("sigma and tau must have equal length");
        }
        let mut seen = vec![false; m];
        for &s in &sigma {
            if s >= m || seen[s] {
                return invalid("sigma is not a permutation");
            }
            seen[s] = true;
        }
        if tau.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return invalid("durations must be finite and non-negative");
        }
        Ok(CycleProgram { sigma, tau })
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }
}

/// Everything that happened during one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepTrace {
    /// `m + 1` states; entry `k` is the state after the first `k` flows.
    pub intermediates: Vec<StateVector>,
    pub program: CycleProgram,
}

impl StepTrace {
    pub fn input(&self) -> &StateVector {
        &self.intermediates[0]
    }

    pub fn output(&self) -> &StateVector {
        self.intermediates.last().expect("trace holds at least the input")
    }
}

/// A region of phase space given by a deterministic predicate.
#[derive(Clone)]
pub struct RegionSpec {
    pub label: String,
    predicate: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
}

impl RegionSpec {
    pub fn new(label: impl Into<String>, predicate: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        RegionSpec { label: label.into(), predicate: Arc::new(predicate) }
    }

    pub fn everything() -> Self {
        RegionSpec::new("everything", |_| true)
    }

    pub fn empty() -> Self {
        RegionSpec::new("empty", |_| false)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (self.predicate)(x)
    }
}

impl fmt::Debug for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegionSpec").field("label", &self.label).finish()
    }
}

/// Draws a uniform permutation (Fisher–Yates) followed by `m` exponential
/// durations with mean `h`.
pub fn sample_cycle<R: RngCore + ?Sized>(rng: &mut R, m: usize, h: f64) -> Result<CycleProgram> {
    if m == 0 {
        return invalid("a splitting needs at least one field");
    }
    if !(h > 0.0) || !h.is_finite() {
        return invalid(format!("mean duration must be positive, got {h}"));
    }
    let mut sigma: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = uniform_index(rng, i);
        sigma.swap(i, j);
    }
    let tau = (0..m).map(|_| exponential(rng, h)).collect();
    Ok(CycleProgram { sigma, tau })
}

fn check_program<S: Splitting + ?Sized>(s: &S, x: &[f64], p: &CycleProgram) -> Result<()> {
    if x.len() != s.dim() {
        return invalid(format!("state has dimension {}, splitting expects {}", x.len(), s.dim()));
    }
    if p.len() != s.num_fields() {
        return invalid(format!("program has {} entries, splitting has {} fields", p.len(), s.num_fields()));
    }
    Ok(())
}

/// Applies one field in place and enforces the overflow policy.
pub fn apply_flow<S: Splitting + ?Sized>(s: &S, field: usize, x: &mut [f64], t: f64) -> Result<()> {
    s.flow(field, x, t)?;
    if x.iter().any(|v| !v.is_finite()) || norm(x) > OVERFLOW_NORM {
        return Err(SplitError::NumericOverflow { field });
    }
    Ok(())
}

/// Composes the flows of `p` starting at `x`, recording every intermediate.
pub fn compose_cycle<S: Splitting + ?Sized>(s: &S, x: &[f64], p: &CycleProgram) -> Result<StepTrace> {
    check_program(s, x, p)?;
    let mut intermediates = Vec::with_capacity(p.len() + 1);
    let mut cur = x.to_vec();
    intermediates.push(StateVector(cur.clone()));
    for (&field, &t) in p.sigma.iter().zip(&p.tau) {
        apply_flow(s, field, &mut cur, t)?;
        intermediates.push(StateVector(cur.clone()));
    }
    Ok(StepTrace { intermediates, program: p.clone() })
}

/// Composes the flows of `p` in place without recording intermediates.
pub fn compose_in_place<S: Splitting + ?Sized>(s: &S, x: &mut [f64], p: &CycleProgram) -> Result<()> {
    check_program(s, x, p)?;
    for (&field, &t) in p.sigma.iter().zip(&p.tau) {
        apply_flow(s, field, x, t)?;
    }
    Ok(())
}

/// One step of the chain.
pub fn step<S: Splitting + ?Sized, R: RngCore + ?Sized>(s: &S, x: &[f64], rng: &mut R, h: f64) -> Result<StepTrace> {
    let p = sample_cycle(rng, s.num_fields(), h)?;
    compose_cycle(s, x, &p)
}

/// One step of the chain, in place. Returns the program that was used.
pub fn step_in_place<S: Splitting + ?Sized, R: RngCore + ?Sized>(
    s: &S,
    x: &mut [f64],
    rng: &mut R,
    h: f64,
) -> Result<CycleProgram> {
    let p = sample_cycle(rng, s.num_fields(), h)?;
    compose_in_place(s, x, &p)?;
    Ok(p)
}

/// States `X_0..X_n`, plus per-step traces when requested.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub states: Vec<StateVector>,
    pub traces: Option<Vec<StepTrace>>,
}

pub fn run_chain<S: Splitting + ?Sized, R: RngCore + ?Sized>(
    s: &S,
    x0: &[f64],
    n: usize,
    rng: &mut R,
    h: f64,
    keep_intermediates: bool,
) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(n + 1);
    let mut traces = keep_intermediates.then(|| Vec::with_capacity(n));
    let mut cur = x0.to_vec();
    states.push(StateVector(cur.clone()));
    for _ in 0..n {
        if let Some(traces) = traces.as_mut() {
            let trace = step(s, &cur, rng, h)?;
            cur.copy_from_slice(trace.output());
            traces.push(trace);
        } else {
            step_in_place(s, &mut cur, rng, h)?;
        }
        states.push(StateVector(cur.clone()));
    }
    Ok(Trajectory { states, traces })
}

/// Position `k` of the first intermediate state lying in `region`, among
/// `0..m` (the state before each flow).
pub fn first_entry(trace: &StepTrace, region: &RegionSpec) -> Option<usize> {
    let m = trace.program.len();
    trace.intermediates[..m].iter().position(|x| region.contains(x))
}

/// Whether the step first enters `region` right before flow `ell` runs.
pub fn entrance_event(trace: &StepTrace, region: &RegionSpec, ell: FlowMapId) -> bool {
    first_entry(trace, region).is_some_and(|k| trace.program.sigma[k] == ell.0)
}

/// The same event as [`entrance_event`], decided while flowing: stops as
/// soon as the first entry is found.
pub fn entrance_streaming<S: Splitting + ?Sized>(
    s: &S,
    x: &[f64],
    p: &CycleProgram,
    region: &RegionSpec,
    ell: FlowMapId,
) -> Result<bool> {
    check_program(s, x, p)?;
    let mut cur = x.to_vec();
    for (&field, &t) in p.sigma.iter().zip(&p.tau) {
        if region.contains(&cur) {
            return Ok(field == ell.0);
        }
        apply_flow(s, field, &mut cur, t)?;
    }
    Ok(false)
}

/// Monte Carlo frequency of the entrance event over `trials` independent
/// cycles started at `x`. Trial `i` uses substream `i` of `seed`.
pub fn estimate_entrance_probability<S: Splitting + ?Sized>(
    s: &S,
    x: &[f64],
    region: &RegionSpec,
    ell: FlowMapId,
    h: f64,
    trials: u64,
    seed: StreamSeed,
) -> Result<Proportion> {
    if trials == 0 {
        return invalid("at least one trial is required");
    }
    if ell.0 >= s.num_fields() {
        return invalid(format!("field {} out of range", ell.0));
    }
    let hits = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.substream(i);
            let p = sample_cycle(&mut rng, s.num_fields(), h)?;
            entrance_streaming(s, x, &p, region, ell).map(u64::from)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(Proportion::new(hits.iter().sum(), trials))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `m` independent scalar decays, one per coordinate.
    struct Decay(usize);

    impl Splitting for Decay {
        fn dim(&self) -> usize {
            self.0
        }
        fn num_fields(&self) -> usize {
            self.0
        }
        fn flow(&self, field: usize, x: &mut [f64], t: f64) -> Result<()> {
            x[field] *= (-t).exp();
            Ok(())
        }
        fn eval_field(&self, field: usize, x: &[f64], out: &mut [f64]) {
            out.fill(0.0);
            out[field] = -x[field];
        }
        fn drift(&self, x: &[f64], out: &mut [f64]) {
            for (o, v) in out.iter_mut().zip(x) {
                *o = -v;
            }
        }
    }

    struct Blowup;

    impl Splitting for Blowup {
        fn dim(&self) -> usize {
            1
        }
        fn num_fields(&self) -> usize {
            1
        }
        fn flow(&self, _: usize, x: &mut [f64], t: f64) -> Result<()> {
            x[0] *= (1000.0 * t).exp();
            Ok(())
        }
        fn eval_field(&self, _: usize, x: &[f64], out: &mut [f64]) {
            out[0] = 1000.0 * x[0];
        }
        fn drift(&self, x: &[f64], out: &mut [f64]) {
            out[0] = 1000.0 * x[0];
        }
    }

    #[test]
    fn sample_cycle_validates_arguments() {
        let mut rng = StreamSeed(0).substream(0);
        assert!(sample_cycle(&mut rng, 0, 1.0).is_err());
        assert!(sample_cycle(&mut rng, 3, 0.0).is_err());
        let p = sample_cycle(&mut rng, 1, 0.5).unwrap();
        assert_eq!(p.sigma, vec![0]);
        assert!(p.tau[0] > 0.0);
    }

    #[test]
    fn zero_durations_give_identity() {
        let s = Decay(3);
        let p = CycleProgram::new(vec![2, 0, 1], vec![0.0; 3]).unwrap();
        let trace = compose_cycle(&s, &[1.0, 2.0, 3.0], &p).unwrap();
        assert_eq!(trace.output().0, vec![1.0, 2.0, 3.0]);
        assert_eq!(trace.intermediates.len(), 4);
    }

    #[test]
    fn overflow_names_the_field() {
        let p = CycleProgram::new(vec![0], vec![1.0]).unwrap();
        let err = compose_cycle(&Blowup, &[1.0], &p).unwrap_err();
        assert_eq!(err, SplitError::NumericOverflow { field: 0 });
    }

    #[test]
    fn entrance_event_cases() {
        let s = Decay(3);
        let p = CycleProgram::new(vec![1, 0, 2], vec![1.0; 3]).unwrap();
        let trace = compose_cycle(&s, &[1.0, 1.0, 1.0], &p).unwrap();
        let all = RegionSpec::everything();
        assert!(entrance_event(&trace, &all, FlowMapId(1)));
        assert!(!entrance_event(&trace, &all, FlowMapId(0)));
        assert!(!entrance_event(&trace, &RegionSpec::empty(), FlowMapId(1)));
        // Entered only once coordinate 1 has decayed, i.e. before flow sigma[1] = 0.
        let low = RegionSpec::new("x1 small", |x| x[1] < 0.5);
        assert!(entrance_event(&trace, &low, FlowMapId(0)));
        assert!(entrance_streaming(&s, &[1.0, 1.0, 1.0], &p, &low, FlowMapId(0)).unwrap());
    }

    #[test]
    fn run_chain_is_deterministic() {
        let s = Decay(4);
        let a = run_chain(&s, &[1.0; 4], 20, &mut StreamSeed(3).substream(0), 0.3, true).unwrap();
        let b = run_chain(&s, &[1.0; 4], 20, &mut StreamSeed(3).substream(0), 0.3, false).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.traces.unwrap().len(), 20);
        let empty = run_chain(&s, &[1.0; 4], 0, &mut StreamSeed(3).substream(0), 0.3, false).unwrap();
        assert_eq!(empty.states.len(), 1);
    }
}
