//! Experiment dispatch. Each experiment returns CSV tables and a JSON
//! summary; nothing here touches the filesystem.

use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};
use splitflow::analysis::{
    entrance_scaling, estimate_drift, fit_drift, return_time_samples, state_with_gap, thermalization_scan,
    AssumptionMargins, RateFunctions,
};
use splitflow::euler::{conserved_pair, flow_canonical, EulerSystem, TriadGeometry, TriadOrbit};
use splitflow::lorenz96::{lyapunov_h, Lorenz96System};
use splitflow::rng::{open_unit, uniform_on_sphere};
use splitflow::splitting::{norm, step_in_place};
use splitflow::{estimate_entrance_probability, FlowMapId, SplitError, Splitting, StreamSeed};

use crate::config::*;
use crate::error::CliError;
use crate::output::{num, Table};

/// One-sided 99% normal quantile.
const Z99: f64 = 2.326_347_874_040_841;

pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: Value,
    /// Set when the run completed but a check it performs did not pass.
    pub failure: Option<String>,
}

enum Built {
    Lorenz(Arc<Lorenz96System>),
    Euler(Arc<EulerSystem>),
}

impl Built {
    fn splitting(&self) -> &dyn Splitting {
        match self {
            Built::Lorenz(s) => s.as_ref(),
            Built::Euler(s) => s.as_ref(),
        }
    }
}

fn build(cfg: &SystemConfig) -> Result<(Built, f64), CliError> {
    match cfg {
        SystemConfig::Lorenz96(l) => {
            let beta = match &l.beta {
                Beta::Scalar(b) => vec![*b; l.d],
                Beta::Vector(v) => v.clone(),
            };
            Ok((Built::Lorenz(Arc::new(Lorenz96System::new(beta)?)), l.h))
        }
        SystemConfig::Euler(e) => {
            let damping: Vec<_> = e.damping.iter().map(|d| (lattice(d.mode), d.rate)).collect();
            let entries: Vec<_> = e
                .forcing
                .iter()
                .enumerate()
                .flat_map(|(i, list)| list.iter().map(move |f| (i + 1, lattice(f.mode), f.part.into(), f.value)))
                .collect();
            let sys = EulerSystem::with_sparse_forcing(e.n, &damping, e.forcing.len(), &entries)?;
            Ok((Built::Euler(Arc::new(sys)), e.h))
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let seed = StreamSeed(cfg.seed);
    let system = cfg.system.as_ref().map(build).transpose()?;
    let need = || system.as_ref().ok_or_else(|| CliError::Config("system block is required".into()));
    match &cfg.experiment {
        Experiment::Simulate(s) => simulate(need()?, s, cfg.trials, seed),
        Experiment::Drift(d) => drift(need()?, d, cfg.trials, seed),
        Experiment::Entrance(e) => entrance(need()?, e, cfg.trials, seed),
        Experiment::Thermalize(t) => thermalize(t, cfg.trials, seed),
        Experiment::ReturnTime(r) => return_time(need()?, r, cfg.trials, seed),
        Experiment::TriadPortrait(p) => portrait(p),
        Experiment::Validate(v) => validate(need()?, v, seed),
    }
}

/// `direction` (or a uniform one drawn from `rng_seed`) scaled to `H = level`.
fn start_state(dim: usize, direction: Option<&Vec<f64>>, level: f64, rng_seed: StreamSeed) -> Result<Vec<f64>, CliError> {
    match direction {
        Some(v) => {
            if v.len() != dim {
                return Err(CliError::Config(format!("direction has {} entries, state has {dim}", v.len())));
            }
            let n = norm(v);
            if n == 0.0 || !n.is_finite() {
                return Err(CliError::Config("direction must be a finite nonzero vector".into()));
            }
            Ok(v.iter().map(|c| c * (level - 1.0) / n).collect())
        }
        None => Ok(uniform_on_sphere(&mut rng_seed.substream(0), dim, level - 1.0)),
    }
}

fn simulate(sys: &(Built, f64), cfg: &SimulateConfig, trials: u64, seed: StreamSeed) -> Result<Outcome, CliError> {
    let (built, h) = sys;
    let s = built.splitting();
    let dim = s.dim();
    let starts: Vec<Vec<f64>> = (0..trials)
        .map(|i| match (&cfg.x0, cfg.level) {
            (Some(x0), None) if x0.len() == dim => Ok(x0.clone()),
            (Some(x0), None) => Err(CliError::Config(format!("x0 has {} entries, state has {dim}", x0.len()))),
            (None, Some(level)) if level >= 1.0 => start_state(dim, None, level, seed.child(0).child(i)),
            (None, Some(level)) => Err(CliError::Config(format!("level is a value of H and must be >= 1, got {level}"))),
            _ => Err(CliError::Config("experiment.simulate: give exactly one of x0 or level".into())),
        })
        .collect::<Result<_, _>>()?;
    let runs: Vec<Result<Vec<Vec<String>>, CliError>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.substream(i);
            let mut x = starts[i as usize].clone();
            let mut rows = Vec::new();
            let record = |step: usize, x: &[f64], rows: &mut Vec<Vec<String>>| {
                let mut row = vec![i.to_string(), step.to_string(), num(lyapunov_h(x))];
                row.extend(x.iter().map(|v| num(*v)));
                rows.push(row);
            };
            record(0, &x, &mut rows);
            for step in 1..=cfg.steps {
                step_in_place(s, &mut x, &mut rng, *h).map_err(|e| match e {
                    SplitError::NumericOverflow { field } => CliError::Overflow { trajectory: i.to_string(), field },
                    other => other.into(),
                })?;
                if step % cfg.record_every == 0 || step == cfg.steps {
                    record(step, &x, &mut rows);
                }
            }
            Ok(rows)
        })
        .collect();
    let mut header = vec!["trajectory".to_string(), "step".into(), "H".into()];
    header.extend((0..dim).map(|c| format!("x{c}")));
    let mut table = Table::new("trajectories", header);
    for run in runs {
        table.rows.extend(run?);
    }
    Ok(Outcome { tables: vec![table], summary: json!({ "trajectories": trials, "steps": cfg.steps }), failure: None })
}

fn drift(sys: &(Built, f64), cfg: &DriftConfig, trials: u64, seed: StreamSeed) -> Result<Outcome, CliError> {
    let (built, h) = sys;
    let s = built.splitting();
    let steps = cfg.steps.unwrap_or(s.num_fields());
    let mut reports = Vec::with_capacity(cfg.levels.len());
    let mut table = Table::new(
        "drift",
        ["level", "h_x", "steps", "trials", "mean", "std_err", "upper99", "overflowed"].map(String::from).to_vec(),
    );
    for (i, &level) in cfg.levels.iter().enumerate() {
        let x = start_state(s.dim(), cfg.direction.as_ref(), level, seed.child(1000 + i as u64))?;
        let r = estimate_drift(s, &x, steps, *h, trials, seed.child(i as u64), lyapunov_h)?;
        table.rows.push(vec![
            num(level),
            num(r.h_x),
            steps.to_string(),
            trials.to_string(),
            num(r.mean.mean),
            num(r.mean.std_err),
            num(r.upper(Z99)),
            r.overflowed.to_string(),
        ]);
        reports.push(r);
    }
    let fit = if reports.len() >= 2 { Some(fit_drift(&reports)?) } else { None };
    let decreasing = reports.iter().all(|r| r.upper(Z99) < r.h_x);
    Ok(Outcome { tables: vec![table], summary: json!({ "fit": fit, "mean_decreases_at_all_levels": decreasing }), failure: None })
}

fn entrance(sys: &(Built, f64), cfg: &EntranceConfig, trials: u64, seed: StreamSeed) -> Result<Outcome, CliError> {
    let (built, h) = sys;
    let mut table = Table::new(
        "entrance",
        ["level", "successes", "trials", "estimate", "ci_low", "ci_high", "estimate_times_loglevel"]
            .map(String::from)
            .to_vec(),
    );
    let mut push = |level: f64, p: splitflow::stats::Proportion| {
        let (lo, hi) = p.interval();
        table.rows.push(vec![
            num(level),
            p.successes.to_string(),
            p.trials.to_string(),
            num(p.estimate),
            num(lo),
            num(hi),
            num(p.estimate * level.ln()),
        ]);
    };
    let region_label;
    match built {
        Built::Lorenz(l) => {
            let region = Lorenz96System::dissipative_region(cfg.eta);
            region_label = region.label.clone();
            for (i, &level) in cfg.levels.iter().enumerate() {
                let x = start_state(l.d(), cfg.direction.as_ref(), level, seed.child(1000 + i as u64))?;
                let p = estimate_entrance_probability(
                    l.as_ref(),
                    &x,
                    &region,
                    FlowMapId(l.star()),
                    *h,
                    trials,
                    seed.child(i as u64),
                )?;
                push(level, p);
            }
        }
        Built::Euler(e) => {
            let scan = entrance_scaling(e, &cfg.levels, cfg.eta, *h, trials, seed)?;
            region_label = format!("D_eta(eta={})", cfg.eta);
            for p in scan.points {
                push(p.h, p.estimate);
            }
        }
    }
    let scaled: Vec<f64> = table.rows.iter().map(|r| r[6].parse().unwrap()).collect();
    let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Outcome { tables: vec![table], summary: json!({ "region": region_label, "band_ratio": max / min }), failure: None })
}

fn thermalize(cfg: &ThermalizeConfig, trials: u64, seed: StreamSeed) -> Result<Outcome, CliError> {
    let g = TriadGeometry::new(lattice(cfg.j), lattice(cfg.k))?;
    let sign = match cfg.side {
        Side::Below => 1.0,
        Side::Above => -1.0,
    };
    let family = |d: f64| state_with_gap(&g, cfg.enstrophy, cfg.y0, sign * cfg.gap_factor * cfg.zeta * d * d);
    let margins = AssumptionMargins { xi: cfg.xi, zeta: cfg.zeta };
    let scan = thermalization_scan(&g, family, margins, cfg.eta, cfg.h, &cfg.deltas, trials, seed)
        .map_err(|e| match e {
            SplitError::Precondition(msg) => CliError::Config(format!("experiment.thermalize: {msg}")),
            other => other.into(),
        })?;
    let mut table = Table::new(
        "thermalization",
        ["delta", "estimate", "ci_low", "ci_high", "estimate_times_logdelta"].map(String::from).to_vec(),
    );
    for p in &scan.points {
        let (lo, hi) = p.estimate.interval();
        table.rows.push(vec![num(p.delta), num(p.estimate.estimate), num(lo), num(hi), num(p.scaled)]);
    }
    Ok(Outcome {
        tables: vec![table],
        summary: json!({ "fitted_c": scan.fitted_c, "band_ratio": scan.band_ratio() }),
        failure: None,
    })
}

fn return_time(sys: &(Built, f64), cfg: &ReturnTimeConfig, trials: u64, seed: StreamSeed) -> Result<Outcome, CliError> {
    let (built, h) = sys;
    let s = built.splitting();
    let mut reports = Vec::with_capacity(cfg.fit_levels.len());
    for (i, &level) in cfg.fit_levels.iter().enumerate() {
        let x = start_state(s.dim(), cfg.direction.as_ref(), level, seed.child(2000 + i as u64))?;
        reports.push(estimate_drift(s, &x, 1, *h, trials, seed.child(i as u64), lyapunov_h)?);
    }
    let fit = fit_drift(&reports)?;
    if !(fit.alpha < 1.0) {
        return Err(CliError::Validation(format!("fitted one-step contraction {} is not below 1", fit.alpha)));
    }
    let rate = RateFunctions::power((1.0 - fit.alpha) / 2.0, 1.0)?;
    let radius = cfg.radius.or(fit.sublevel_radius()).unwrap_or(1.0).max(1.0);
    let x = start_state(s.dim(), cfg.direction.as_ref(), cfg.level, seed.child(3000))?;
    let times = return_time_samples(s, &x, radius, *h, cfg.max_steps, trials, seed.child(4000), lyapunov_h)?;
    let upto = times.quantile(cfg.quantile);
    let mut table = Table::new("tail", ["n", "survival", "bound"].map(String::from).to_vec());
    for n in 0..=upto {
        table.rows.push(vec![n.to_string(), num(times.survival(n + 1)), num(rate.tail_bound(times.h_x, n as f64))]);
    }
    let mut samples = Table::new("return_times", ["trial", "steps"].map(String::from).to_vec());
    for (i, t) in times.samples.iter().enumerate() {
        samples.rows.push(vec![i.to_string(), t.map(|v| v.to_string()).unwrap_or_default()]);
    }
    Ok(Outcome {
        tables: vec![table, samples],
        summary: json!({
            "alpha": fit.alpha,
            "f": fit.f,
            "dominating_f": fit.dominating_f(),
            "radius": radius,
            "rate": (1.0 - fit.alpha) / 2.0,
            "quantile": upto,
            "censored_fraction": times.censored_fraction(),
            "worst_tail_excess": times.worst_tail_excess(&rate, cfg.quantile),
        }),
        failure: None,
    })
}

/// One row of a triad portrait.
#[derive(Debug, Clone, PartialEq)]
pub struct PortraitSample {
    pub orbit: usize,
    pub t: f64,
    pub state: [f64; 3],
    pub energy: f64,
    pub enstrophy: f64,
}

/// Uniformly sampled exact-flow trajectories of the triad `(j, k, j + k)`.
/// Orbits on the separatrix are advanced sample to sample with the
/// numerical fallback.
pub fn emit_portrait(g: &TriadGeometry, initial: &[[f64; 3]], t_max: f64, samples: usize) -> Result<Vec<PortraitSample>, CliError> {
    let invariants = |s: [f64; 3]| {
        let e = s[0] * s[0] / g.nj2 as f64 + s[1] * s[1] / g.nk2 as f64 + s[2] * s[2] / g.nl2 as f64;
        (e, s.iter().map(|v| v * v).sum::<f64>())
    };
    let dt = t_max / (samples - 1) as f64;
    let mut out = Vec::with_capacity(initial.len() * samples);
    for (orbit, &start) in initial.iter().enumerate() {
        let exact = match TriadOrbit::new(g, start) {
            Ok(o) => Some(o),
            Err(SplitError::InterfaceDegenerate { .. }) | Err(SplitError::DegenerateModulus { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let mut cur = start;
        for i in 0..samples {
            let t = i as f64 * dt;
            let state = match &exact {
                Some(o) => o.eval(t),
                None if i == 0 => start,
                None => {
                    cur = flow_canonical(g, cur, dt)?.state;
                    cur
                }
            };
            let (energy, enstrophy) = invariants(state);
            out.push(PortraitSample { orbit, t, state, energy, enstrophy });
        }
    }
    Ok(out)
}

fn portrait(cfg: &PortraitConfig) -> Result<Outcome, CliError> {
    let g = TriadGeometry::new(lattice(cfg.j), lattice(cfg.k))?;
    let rows = emit_portrait(&g, &cfg.initial, cfg.t_max, cfg.samples)?;
    let mut table = Table::new("portrait", ["orbit", "t", "x", "y", "z", "E", "enstrophy"].map(String::from).to_vec());
    for r in &rows {
        table.rows.push(vec![
            r.orbit.to_string(),
            num(r.t),
            num(r.state[0]),
            num(r.state[1]),
            num(r.state[2]),
            num(r.energy),
            num(r.enstrophy),
        ]);
    }
    let interface_gap: Vec<f64> = cfg
        .initial
        .iter()
        .map(|s| (g.a() * s[2] * s[2] - g.b() * s[0] * s[0]) / s.iter().map(|v| v * v).sum::<f64>())
        .collect();
    Ok(Outcome { tables: vec![table], summary: json!({ "relative_gap": interface_gap }), failure: None })
}

struct Check {
    name: String,
    worst: f64,
    tolerance: f64,
}

fn validate(sys: &(Built, f64), cfg: &ValidateConfig, seed: StreamSeed) -> Result<Outcome, CliError> {
    let (built, _) = sys;
    let s = built.splitting();
    let dim = s.dim();
    let states: Vec<Vec<f64>> = (0..cfg.states as u64)
        .map(|i| {
            let mut rng = seed.substream(i);
            let r = 10.0 * open_unit(&mut rng);
            uniform_on_sphere(&mut rng, dim, r)
        })
        .collect();
    let rel = |a: &[f64], b: &[f64]| {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm(&diff) / norm(b).max(f64::MIN_POSITIVE)
    };
    let sum_err = states
        .par_iter()
        .map(|x| {
            let (mut sum, mut tmp, mut full) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
            for f in 0..s.num_fields() {
                s.eval_field(f, x, &mut tmp);
                sum.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);
            }
            s.drift(x, &mut full);
            rel(&sum, &full)
        })
        .reduce(|| 0.0, f64::max);
    let mut checks = vec![Check { name: "splitting_sum".into(), worst: sum_err, tolerance: 1e-12 }];
    let conservative: Vec<usize> = match built {
        Built::Lorenz(l) => (0..l.d()).collect(),
        Built::Euler(e) => (e.first_triad_field()..e.num_fields()).collect(),
    };
    let horizon = cfg.horizon;
    let h_err = states
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let f = conservative[i % conservative.len()];
            let mut y = x.clone();
            s.flow(f, &mut y, horizon)?;
            Ok((lyapunov_h(&y) - lyapunov_h(x)).abs() / lyapunov_h(x))
        })
        .collect::<Result<Vec<f64>, SplitError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check { name: "H_conservation".into(), worst: h_err, tolerance: 1e-10 });
    if let Built::Euler(e) = built {
        let pair_err = states
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let idx = i % e.triads().len();
                let key = e.triads()[idx];
                let [a, b, c] = e.triad_coordinates(x, idx);
                let (e0, n0) = conserved_pair(a, b, c, &key);
                let mut y = x.clone();
                e.triad_flow(&mut y, idx, horizon)?;
                let [a, b, c] = e.triad_coordinates(&y, idx);
                let (e1, n1) = conserved_pair(a, b, c, &key);
                let scale = |v: f64| v.max(f64::MIN_POSITIVE);
                Ok(((e1 - e0).abs() / scale(e0)).max((n1 - n0).abs() / scale(n0)))
            })
            .collect::<Result<Vec<f64>, SplitError>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(Check { name: "triad_energy_enstrophy".into(), worst: pair_err, tolerance: 1e-10 });
    }
    let mut table = Table::new("validate", ["check", "worst_relative_error", "tolerance", "pass"].map(String::from).to_vec());
    for c in &checks {
        table.rows.push(vec![c.name.clone(), num(c.worst), num(c.tolerance), (c.worst <= c.tolerance).to_string()]);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !(c.worst <= c.tolerance)).map(|c| c.name.as_str()).collect();
    let failure = (!failed.is_empty()).then(|| failed.join(", "));
    Ok(Outcome { tables: vec![table], summary: json!({ "states": cfg.states, "failed": failed }), failure })
}
