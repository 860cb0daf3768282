//! Jacobi elliptic functions in the parameter convention `rho = m = k^2`.
//!
//! `sn` is defined on `[0, K]` as the inverse of
//! `T(s) = ∫_0^s db / (sqrt(1 - rho b^2) sqrt(1 - b^2))` and extended to the
//! real line by reflection about `K`, odd reflection about `2K`, and period
//! `4K`; `cn` and `dn` follow the same piecewise rules. The quarter period is
//! computed with the arithmetic–geometric mean and the functions themselves
//! with the descending Landen (Gauss) transformation.
//!
//! Near the separatrix the parameter is within rounding of 1, so every
//! routine here works from the complementary parameter `1 - rho`, which
//! callers should supply directly when they can compute it more accurately
//! than `1 - rho`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Result, SplitError};

/// Smallest complementary parameter accepted before the modulus is treated
/// as degenerate (`K` is then beyond 30).
pub const MIN_COMPLEMENT: f64 = 1e-26;

/// An elliptic parameter `rho` in `[0, 1)` stored together with its
/// complement `1 - rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    rho: f64,
    complement: f64,
    quarter_period: f64,
}

/// Values of the three Jacobi functions at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Requested sign of `cn` when inverting from an `sn` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnSign {
    Positive,
    Negative,
    Zero,
}

impl EllipticModulus {
    pub fn new(rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return invalid(format!("elliptic parameter must lie in [0, 1), got {rho}"));
        }
        Self::from_complement(1.0 - rho)
    }

    /// Builds the modulus from `1 - rho`.
    pub fn from_complement(complement: f64) -> Result<Self> {
        if !(complement > 0.0 && complement <= 1.0) {
            return invalid(format!("complementary parameter must lie in (0, 1], got {complement}"));
        }
        if complement < MIN_COMPLEMENT {
            return Err(SplitError::DegenerateModulus { complement });
        }
        let quarter_period = FRAC_PI_2 / agm(1.0, complement.sqrt());
        Ok(Self { rho: 1.0 - complement, complement, quarter_period })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn complement(&self) -> f64 {
        self.complement
    }

    /// `K = T(1)`.
    pub fn quarter_period(&self) -> f64 {
        self.quarter_period
    }

    /// `sn`, `cn`, `dn` at any real argument.
    pub fn jacobi(&self, x: f64) -> Jacobi {
        let k = self.quarter_period;
        let r = x.rem_euclid(4.0 * k);
        let quadrant = ((r / k) as usize).min(3);
        let w = (r - quadrant as f64 * k).clamp(0.0, k);
        match quadrant {
            0 => self.first_quadrant(w),
            1 => {
                let j = self.first_quadrant(k - w);
                Jacobi { sn: j.sn, cn: -j.cn, dn: j.dn }
            }
            2 => {
                let j = self.first_quadrant(w);
                Jacobi { sn: -j.sn, cn: -j.cn, dn: j.dn }
            }
            _ => {
                let j = self.first_quadrant(k - w);
                Jacobi { sn: -j.sn, cn: j.cn, dn: j.dn }
            }
        }
    }

    /// Values on `[0, K]`. The upper half uses the quarter-period shift
    /// `sn(K - v) = cn(v)/dn(v)`, `cn(K - v) = k' sn(v)/dn(v)`,
    /// `dn(K - v) = k'/dn(v)` so that small `cn` keeps its relative accuracy.
    fn first_quadrant(&self, w: f64) -> Jacobi {
        let k = self.quarter_period;
        if w <= 0.5 * k {
            return gauss_sncndn(w, self.complement);
        }
        let v = k - w;
        let j = gauss_sncndn(v, self.complement);
        let kp = self.complement.sqrt();
        Jacobi { sn: j.cn / j.dn, cn: kp * j.sn / j.dn, dn: kp / j.dn }
    }

    /// `T(s)` for `s` in `[0, 1]`.
    pub fn incomplete(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return invalid(format!("incomplete integral argument must lie in [0, 1], got {s}"));
        }
        if s == 1.0 {
            return Ok(self.quarter_period);
        }
        let c2 = (1.0 - s) * (1.0 + s);
        Ok(s * carlson_rf(c2, c2 + self.complement * s * s, 1.0))
    }

    /// The unique phase in `[0, 4K)` at which `(sn, cn)` point in the
    /// direction of the given pair. Magnitudes need only be proportional to
    /// the true values; the pair is normalized before inversion.
    pub fn phase_from_values(&self, sn: f64, cn: f64) -> Result<f64> {
        if !sn.is_finite() || !cn.is_finite() || (sn == 0.0 && cn == 0.0) {
            return invalid("phase inversion needs a finite, non-zero (sn, cn) pair");
        }
        let r = sn.hypot(cn);
        let (s, c) = (sn.abs() / r, cn.abs() / r);
        let reference = (s * carlson_rf(c * c, c * c + self.complement * s * s, 1.0)).min(self.quarter_period);
        let k = self.quarter_period;
        let theta = match (sn >= 0.0, cn >= 0.0) {
            (true, true) => reference,
            (true, false) => 2.0 * k - reference,
            (false, false) => 2.0 * k + reference,
            (false, true) => 4.0 * k - reference,
        };
        Ok(if theta >= 4.0 * k { theta - 4.0 * k } else { theta })
    }

    /// Phase with `sn(θ) = sn_val` and `cn(θ)` of the requested sign.
    pub fn phase_from_pair(&self, sn_val: f64, cn_sign: CnSign) -> Result<f64> {
        if !(sn_val.abs() <= 1.0) {
            return invalid(format!("sn value must lie in [-1, 1], got {sn_val}"));
        }
        let cn_mag = ((1.0 - sn_val.abs()) * (1.0 + sn_val.abs())).sqrt();
        let cn = match cn_sign {
            CnSign::Positive => cn_mag,
            CnSign::Negative => -cn_mag,
            CnSign::Zero if cn_mag == 0.0 => 0.0,
            CnSign::Zero => return invalid("cn can only vanish where |sn| = 1"),
        };
        self.phase_from_values(sn_val, cn)
    }
}

/// Quarter period `K` for parameter `rho` in `[0, 1)`.
pub fn quarter_period(rho: f64) -> Result<f64> {
    Ok(EllipticModulus::new(rho)?.quarter_period())
}

/// `T_rho(s)`.
pub fn incomplete(rho: f64, s: f64) -> Result<f64> {
    EllipticModulus::new(rho)?.incomplete(s)
}

/// `(sn, cn, dn)` at `x` for parameter `rho`.
pub fn jacobi(rho: f64, x: f64) -> Result<Jacobi> {
    Ok(EllipticModulus::new(rho)?.jacobi(x))
}

/// Arithmetic–geometric mean.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Carlson's symmetric integral `R_F(x, y, z)` by duplication.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    for _ in 0..100 {
        let mu = (x + y + z) / 3.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-4 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
    }
    1.0 / ((x + y + z) / 3.0).sqrt()
}

/// Descending Gauss transformation for `sn, cn, dn` given the complementary
/// parameter. Accurate on `[0, K/2]`; callers reduce the argument first.
fn gauss_sncndn(u: f64, complement: f64) -> Jacobi {
    const TOL: f64 = 1e-9;
    let mut em = [0.0f64; 24];
    let mut en = [0.0f64; 24];
    let mut a = 1.0;
    let mut emc = complement;
    let mut c = 1.0;
    let mut last = 0;
    for i in 0..24 {
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        last = i;
        if (a - emc).abs() <= TOL * a {
            break;
        }
        emc *= a;
        a = c;
    }
    let arg = u * c;
    let mut sn = arg.sin();
    let mut cn = arg.cos();
    let mut dn = 1.0;
    if sn != 0.0 {
        let mut a = cn / sn;
        c *= a;
        for ii in (0..=last).rev() {
            let b = em[ii];
            a *= c;
            c *= dn;
            dn = (en[ii] + a) / (b + a);
            a = c / b;
        }
        let norm = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { norm } else { -norm };
        cn = c * sn;
    }
    Jacobi { sn, cn, dn }
}
