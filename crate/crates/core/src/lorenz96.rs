//! The Lorenz '96 system with damping and forcing on mode 1, split into `d`
//! length-preserving rotations plus one damped, forced field.
//!
//! Modes are 0-based here: mode `i` of this module is mode `i + 1` in the
//! usual 1-based notation, and all index arithmetic wraps modulo `d`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SplitError};
use crate::splitting::{norm, Splitting};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lorenz96System {
    beta: Vec<f64>,
}

impl Lorenz96System {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.len() < 4 {
            return invalid(format!("dimension must be at least 4, got {}", beta.len()));
        }
        if let Some(i) = beta.iter().position(|b| *b == 0.0 || !b.is_finite()) {
            return invalid(format!("forcing beta[{i}] must be finite and non-zero"));
        }
        Ok(Lorenz96System { beta })
    }

    /// Constant forcing `beta` on every mode.
    pub fn uniform(d: usize, beta: f64) -> Result<Self> {
        Self::new(vec![beta; d])
    }

    pub fn d(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn beta_norm(&self) -> f64 {
        norm(&self.beta)
    }

    /// Field id of the damped, forced field.
    pub fn star(&self) -> usize {
        self.d()
    }

    fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.d() as isize) as usize
    }

    /// Rotation of `(x_i, x_{i+1})` at angular rate `x_{i-1}`.
    pub fn rotation_flow(&self, x: &mut [f64], i: usize, t: f64) {
        let (prev, next) = (self.wrap(i as isize - 1), self.wrap(i as isize + 1));
        let (s, c) = (x[prev] * t).sin_cos();
        let (xi, xn) = (x[i], x[next]);
        x[i] = xi * c + xn * s;
        x[next] = -xi * s + xn * c;
    }

    pub fn star_flow(&self, x: &mut [f64], t: f64) {
        let decay = (-t).exp();
        x[0] = decay * x[0] - (-t).exp_m1() * self.beta[0];
        for (xi, b) in x.iter_mut().zip(&self.beta).skip(1) {
            *xi += b * t;
        }
    }

    pub fn rotation_field(&self, x: &[f64], i: usize, out: &mut [f64]) {
        let (prev, next) = (self.wrap(i as isize - 1), self.wrap(i as isize + 1));
        out.fill(0.0);
        out[i] = x[next] * x[prev];
        out[next] = -x[i] * x[prev];
    }

    pub fn star_field(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.beta);
        out[0] -= x[0];
    }

    /// `(x_{i+1} - x_{i-2}) x_{i-1} - [i = 0] x_i + beta_i`.
    pub fn full_drift(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let i = i as isize;
            *o = (x[self.wrap(i + 1)] - x[self.wrap(i - 2)]) * x[self.wrap(i - 1)] + self.beta[i as usize];
        }
        out[0] -= x[0];
    }

    /// Dissipative region `{x_1^2 >= eta |x|^2}` as a predicate.
    pub fn dissipative_region(eta: f64) -> crate::splitting::RegionSpec {
        crate::splitting::RegionSpec::new(format!("D_eta(eta={eta})"), move |x| in_dissipative_region(x, eta))
    }
}

impl Splitting for Lorenz96System {
    fn dim(&self) -> usize {
        self.d()
    }

    fn num_fields(&self) -> usize {
        self.d() + 1
    }

    fn flow(&self, field: usize, x: &mut [f64], t: f64) -> Result<()> {
        if field < self.d() {
            self.rotation_flow(x, field, t);
        } else {
            self.star_flow(x, t);
        }
        Ok(())
    }

    fn eval_field(&self, field: usize, x: &[f64], out: &mut [f64]) {
        if field < self.d() {
            self.rotation_field(x, field, out);
        } else {
            self.star_field(x, out);
        }
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        self.full_drift(x, out);
    }

    fn field_label(&self, field: usize) -> String {
        if field < self.d() {
            format!("rot{}", field + 1)
        } else {
            "star".into()
        }
    }
}

/// `H(x) = |x| + 1`.
pub fn lyapunov_h(x: &[f64]) -> f64 {
    norm(x) + 1.0
}

pub fn in_dissipative_region(x: &[f64], eta: f64) -> bool {
    let n = norm(x);
    if n == 0.0 {
        return true;
    }
    let r = x[0] / n;
    r * r >= eta
}

/// Radii of the ladder regions, kept as logarithms.
///
/// `R_0 = 1/sqrt(d)`, `R_j = R_{j-1} h / 16`, `R = 2^{d+5} max(|beta|, 1) / R_{d-1}`
/// and `R_* = 2^{d-1} R + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderConfig {
    d: usize,
    log_r: Vec<f64>,
    log_outer: f64,
}

pub const MAX_LADDER_DIM: usize = 12;

impl LadderConfig {
    pub fn new(d: usize, h: f64, beta_norm: f64) -> Result<Self> {
        if d < 4 || d > MAX_LADDER_DIM {
            return invalid(format!("ladder dimension must lie in 4..={MAX_LADDER_DIM}, got {d}"));
        }
        if !(h > 0.0) || !(beta_norm >= 0.0) {
            return invalid("ladder needs h > 0 and |beta| >= 0");
        }
        let step = (h / 16.0).ln();
        let log_r: Vec<f64> = (0..d).map(|j| -0.5 * (d as f64).ln() + j as f64 * step).collect();
        let log_outer = (d + 5) as f64 * std::f64::consts::LN_2 + beta_norm.max(1.0).ln() - log_r[d - 1];
        if !log_outer.is_finite() || log_outer + (d - 1) as f64 * std::f64::consts::LN_2 > f64::MAX.ln() {
            return Err(SplitError::Precondition("ladder radius overflows f64".into()));
        }
        Ok(LadderConfig { d, log_r, log_outer })
    }

    pub fn for_system(sys: &Lorenz96System, h: f64) -> Result<Self> {
        Self::new(sys.d(), h, sys.beta_norm())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `R_j` for `j` in `0..d`.
    pub fn r(&self, j: usize) -> f64 {
        self.log_r[j].exp()
    }

    pub fn outer_radius(&self) -> f64 {
        self.log_outer.exp()
    }

    /// `R_* = 2^{d-1} R + 1`.
    pub fn r_star(&self) -> f64 {
        (self.log_outer + (self.d - 1) as f64 * std::f64::consts::LN_2).exp() + 1.0
    }

    /// Whether `x` lies in `U_j` (1-based `j`).
    pub fn in_region(&self, x: &[f64], j: usize) -> bool {
        let d = self.d;
        assert!((1..=d).contains(&j), "ladder region index out of range");
        let n = norm(x);
        if n == 0.0 {
            return false;
        }
        let log_n = n.ln();
        if log_n < (j - 1) as f64 * std::f64::consts::LN_2 + self.log_outer {
            return false;
        }
        let ratio = |i: usize| x[i].abs().ln() - log_n;
        if ratio(j - 1) < self.log_r[d - j] {
            return false;
        }
        j == 1 || ratio(j - 2) < self.log_r[d - j + 1]
    }

    /// Smallest `j` with `x` in `U_j`. Every `x` with `H(x) > R_*` has one.
    pub fn region_index(&self, x: &[f64]) -> Option<usize> {
        (1..=self.d).find(|&j| self.in_region(x, j))
    }
}

pub fn ladder_region_index(ladder: &LadderConfig, x: &[f64]) -> Option<usize> {
    ladder.region_index(x)
}

/// Whether `h` satisfies the step-size conditions used for the ladder
/// entrance bounds: `h < pi/12`, `e^{-6h} >= 3/4`,
/// `1 - e^{-5h} - 3h e^{-5h} >= h`, and `|sin y| <= h` forcing `y` within
/// `3h` of a multiple of `pi` (checked on a grid over `[0, 4 pi]`).
pub fn h_star_valid(h: f64) -> bool {
    use std::f64::consts::PI;
    if !(h > 0.0) || h >= PI / 12.0 {
        return false;
    }
    if (-6.0 * h).exp() < 0.75 {
        return false;
    }
    let e5 = (-5.0 * h).exp();
    if 1.0 - e5 - 3.0 * h * e5 < h {
        return false;
    }
    const GRID: usize = 40_000;
    (0..=GRID).all(|i| {
        let y = 4.0 * PI * i as f64 / GRID as f64;
        if y.sin().abs() > h {
            return true;
        }
        let nearest = (y / PI).round() * PI;
        (y - nearest).abs() < 3.0 * h
    })
}
