//! Exact flow of a single triad field.
//!
//! Every triad field reduces to the spinning-top system
//! `X' = θ_kl Y Z`, `Y' = θ_jl X Z`, `Z' = -θ_jk X Y`. Writing
//! `s = j.k^perp / 4π`, `A = 1/|k|^2 - 1/|l|^2`, `B = 1/|j|^2 - 1/|k|^2` and
//! `C = 1/|j|^2 - 1/|l|^2`, the coefficients are `θ_kl = -sA`, `θ_jl = sC`,
//! `θ_jk = sB`, and the system conserves `P = C X^2 + A Y^2`,
//! `Q = B Y^2 + C Z^2` and the gap `ε = A Z^2 - B X^2 = ℰ/|k|^2 - E`.
//! The sign of `ε` picks the elliptic branch; `ε = 0` is the separatrix.

use std::f64::consts::PI;

use serde::Serialize;

use super::lattice::{inv_diff, LatticeIndex, TriadKey};
use crate::elliptic::{EllipticModulus, MIN_COMPLEMENT};
use crate::error::{invalid, Result, SplitError};
use crate::numerics::{diff_of_weighted_squares, integrate_ode};

/// States with `|ε| <= INTERFACE_TOL * ℰ` are treated as lying on the
/// separatrix and integrated numerically.
pub const INTERFACE_TOL: f64 = 1e-24;

const FALLBACK_RTOL: f64 = 1e-13;

/// Norms and orientation of a triad, which is all its flow depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TriadGeometry {
    pub nj2: i64,
    pub nk2: i64,
    pub nl2: i64,
    /// `j . k^perp`.
    pub cross: i64,
}

impl TriadGeometry {
    pub fn new(j: LatticeIndex, k: LatticeIndex) -> Result<Self> {
        let cross = j.cross(k);
        if cross == 0 {
            return invalid(format!("{j} and {k} are parallel"));
        }
        Ok(TriadGeometry { nj2: j.norm2(), nk2: k.norm2(), nl2: j.add(k).norm2(), cross })
    }

    pub fn from_key(key: &TriadKey) -> Self {
        TriadGeometry { nj2: key.j.norm2(), nk2: key.k.norm2(), nl2: key.l.norm2(), cross: key.j.cross(key.k) }
    }

    pub fn s(&self) -> f64 {
        self.cross as f64 / (4.0 * PI)
    }

    pub fn a(&self) -> f64 {
        inv_diff(self.nk2, self.nl2)
    }

    pub fn b(&self) -> f64 {
        inv_diff(self.nj2, self.nk2)
    }

    pub fn c(&self) -> f64 {
        inv_diff(self.nj2, self.nl2)
    }

    pub fn theta_kl(&self) -> f64 {
        -self.s() * self.a()
    }

    pub fn theta_jl(&self) -> f64 {
        self.s() * self.c()
    }

    pub fn theta_jk(&self) -> f64 {
        self.s() * self.b()
    }

    /// Right-hand side of the spinning-top system.
    pub fn field(&self, [x, y, z]: [f64; 3]) -> [f64; 3] {
        [self.theta_kl() * y * z, self.theta_jl() * x * z, -self.theta_jk() * x * y]
    }

    /// The same system with the roles of `j` and `k` exchanged.
    fn swapped(&self) -> TriadGeometry {
        TriadGeometry { nj2: self.nk2, nk2: self.nj2, nl2: self.nl2, cross: -self.cross }
    }
}

/// Relative energy `E = x^2/|j|^2 + y^2/|k|^2 + z^2/|l|^2` and relative
/// enstrophy `ℰ = x^2 + y^2 + z^2`.
pub fn conserved_pair(x: f64, y: f64, z: f64, key: &TriadKey) -> (f64, f64) {
    let g = TriadGeometry::from_key(key);
    conserved_pair_geom(&g, [x, y, z])
}

pub(crate) fn conserved_pair_geom(g: &TriadGeometry, [x, y, z]: [f64; 3]) -> (f64, f64) {
    let e = x * x / g.nj2 as f64 + y * y / g.nk2 as f64 + z * z / g.nl2 as f64;
    (e, x * x + y * y + z * z)
}

/// Which side of the separatrix the orbit lives on, with the sign that
/// stays fixed along it (`z` for A1, `x` for A2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Branch {
    /// `ℰ/|l|^2 < E < ℰ/|k|^2`.
    A1 { sign: f64 },
    /// `ℰ/|k|^2 < E < ℰ/|j|^2`.
    A2 { sign: f64 },
}

/// Elliptic parametrization of one orbit, for `|j| < |k|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriadParams {
    pub energy: f64,
    pub enstrophy: f64,
    /// `ℰ/|k|^2 - E`, computed with compensated arithmetic.
    pub gap: f64,
    pub kappa1: f64,
    pub gamma1: f64,
    pub kappa2: f64,
    pub gamma2: f64,
    pub rho: f64,
    /// `1 - rho`, computed directly from the invariants.
    pub complement: f64,
    pub quarter_period: f64,
    /// Phase speed of the argument `omega t + theta0`.
    pub omega: f64,
    pub theta0: f64,
    pub branch: Branch,
}

impl TriadParams {
    /// Orbit period in unscaled time.
    pub fn period(&self) -> f64 {
        4.0 * self.quarter_period / self.omega.abs()
    }
}

/// Elliptic parameters of the orbit through `(x0, y0, z0)`. Requires
/// `|j| < |k|`, at least two nonzero coordinates, and a state off the
/// separatrix.
pub fn triad_params(x0: f64, y0: f64, z0: f64, key: &TriadKey) -> Result<TriadParams> {
    params_for(&TriadGeometry::from_key(key), [x0, y0, z0])
}

pub(crate) fn params_for(g: &TriadGeometry, [x, y, z]: [f64; 3]) -> Result<TriadParams> {
    if !(x.is_finite() && y.is_finite() && z.is_finite()) {
        return invalid("triad state must be finite");
    }
    if g.nj2 >= g.nk2 {
        return Err(SplitError::Precondition("elliptic parametrization needs |j| < |k|".into()));
    }
    let (s, a, b, c) = (g.s(), g.a(), g.b(), g.c());
    let p = c * x * x + a * y * y;
    let q = b * y * y + c * z * z;
    let gap = diff_of_weighted_squares(a, z, b, x);
    let (energy, enstrophy) = conserved_pair_geom(g, [x, y, z]);
    if p == 0.0 || q == 0.0 {
        return Err(SplitError::Precondition("state is an equilibrium of the triad".into()));
    }
    if gap.abs() <= INTERFACE_TOL * enstrophy {
        return Err(SplitError::InterfaceDegenerate { gap: gap / enstrophy });
    }
    let (kappa1, gamma1, kappa2, gamma2) = (p / c, a / p, q / c, b / q);
    let (complement, omega, branch, sn0, cn0) = if gap > 0.0 {
        let sign = if z > 0.0 { 1.0 } else { -1.0 };
        (c * gap / (a * q), s * (a * q).sqrt(), Branch::A1 { sign }, sign * y * gamma1.sqrt(), x / kappa1.sqrt())
    } else {
        let sign = if x > 0.0 { 1.0 } else { -1.0 };
        (-c * gap / (b * p), s * (b * p).sqrt(), Branch::A2 { sign }, sign * y * gamma2.sqrt(), z / kappa2.sqrt())
    };
    if complement < MIN_COMPLEMENT {
        return Err(SplitError::InterfaceDegenerate { gap: gap / enstrophy });
    }
    let modulus = EllipticModulus::from_complement(complement.min(1.0))?;
    let theta0 = modulus.phase_from_values(sn0, cn0)?;
    Ok(TriadParams {
        energy,
        enstrophy,
        gap,
        kappa1,
        gamma1,
        kappa2,
        gamma2,
        rho: modulus.rho(),
        complement: modulus.complement(),
        quarter_period: modulus.quarter_period(),
        omega,
        theta0,
        branch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum OrbitKind {
    Fixed,
    /// `|j| = |k|`: `(X, Y)` rotates at `rate`, `Z` is constant.
    Rotation { rate: f64 },
    Elliptic { params: TriadParams, modulus: EllipticModulus },
}

/// A closed-form orbit of the spinning-top system, ready to be evaluated at
/// any time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriadOrbit {
    start: [f64; 3],
    kind: OrbitKind,
    /// `j` and `k` were exchanged to reach `|j| < |k|`.
    swapped: bool,
}

impl TriadOrbit {
    /// Fails with [`SplitError::InterfaceDegenerate`] on the separatrix.
    pub fn new(g: &TriadGeometry, start: [f64; 3]) -> Result<Self> {
        if start.iter().any(|v| !v.is_finite()) {
            return invalid("triad state must be finite");
        }
        let zeros = start.iter().filter(|v| **v == 0.0).count();
        if zeros >= 2 {
            return Ok(TriadOrbit { start, kind: OrbitKind::Fixed, swapped: false });
        }
        if g.nj2 == g.nk2 {
            let rate = g.theta_jl() * start[2];
            return Ok(TriadOrbit { start, kind: OrbitKind::Rotation { rate }, swapped: false });
        }
        let (geom, local, swapped) =
            if g.nj2 > g.nk2 { (g.swapped(), [start[1], start[0], start[2]], true) } else { (*g, start, false) };
        let params = params_for(&geom, local)?;
        let modulus = EllipticModulus::from_complement(params.complement)?;
        Ok(TriadOrbit { start, kind: OrbitKind::Elliptic { params, modulus }, swapped })
    }

    /// Elliptic parameters, when the orbit is elliptic. For `|k| < |j|` they
    /// refer to the system with `j` and `k` exchanged.
    pub fn params(&self) -> Option<&TriadParams> {
        match &self.kind {
            OrbitKind::Elliptic { params, .. } => Some(params),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        match self.kind {
            OrbitKind::Fixed => self.start,
            OrbitKind::Rotation { rate } => {
                let [x, y, z] = self.start;
                let (sn, cs) = (rate * t).sin_cos();
                [x * cs - y * sn, x * sn + y * cs, z]
            }
            OrbitKind::Elliptic { params: p, modulus } => {
                let jac = modulus.jacobi(p.omega * t + p.theta0);
                let out = match p.branch {
                    Branch::A1 { sign } => {
                        [p.kappa1.sqrt() * jac.cn, sign * jac.sn / p.gamma1.sqrt(), sign * p.kappa2.sqrt() * jac.dn]
                    }
                    Branch::A2 { sign } => {
                        [sign * p.kappa1.sqrt() * jac.dn, sign * jac.sn / p.gamma2.sqrt(), p.kappa2.sqrt() * jac.cn]
                    }
                };
                if self.swapped {
                    [out[1], out[0], out[2]]
                } else {
                    out
                }
            }
        }
    }

    /// State of the system rescaled by `δ`, `x' = (θ_kl/δ) y z` etc., at
    /// time `t`: the unscaled orbit at `t/δ`.
    pub fn eval_rescaled(&self, t: f64, delta: f64) -> [f64; 3] {
        self.eval(t / delta)
    }
}

/// Outcome of one triad flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriadFlow {
    pub state: [f64; 3],
    /// The state sat on the separatrix and was integrated numerically.
    pub used_fallback: bool,
}

/// Time-`t` map of the spinning-top system for geometry `g`.
pub fn flow_canonical(g: &TriadGeometry, start: [f64; 3], t: f64) -> Result<TriadFlow> {
    match TriadOrbit::new(g, start) {
        Ok(orbit) => Ok(TriadFlow { state: orbit.eval(t), used_fallback: false }),
        Err(SplitError::InterfaceDegenerate { .. }) | Err(SplitError::DegenerateModulus { .. }) => {
            let scale = start.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let sol = integrate_ode(
                |y, dy| dy.copy_from_slice(&g.field([y[0], y[1], y[2]])),
                &start,
                t,
                FALLBACK_RTOL,
                FALLBACK_RTOL * scale,
            )?;
            Ok(TriadFlow { state: [sol.state[0], sol.state[1], sol.state[2]], used_fallback: true })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::lattice::Family;

    fn geom(j: (i64, i64), k: (i64, i64)) -> TriadGeometry {
        TriadGeometry::new(LatticeIndex::new(j.0, j.1), LatticeIndex::new(k.0, k.1)).unwrap()
    }

    #[test]
    fn coefficients_match_theta() {
        use crate::euler::lattice::theta;
        let (j, k) = (LatticeIndex::new(1, 0), LatticeIndex::new(1, 1));
        let l = j.add(k);
        let g = TriadGeometry::new(j, k).unwrap();
        assert!((g.theta_kl() - theta(k, l)).abs() < 1e-17);
        assert!((g.theta_jl() - theta(j, l)).abs() < 1e-17);
        assert!((g.theta_jk() - theta(j, k)).abs() < 1e-17);
    }

    #[test]
    fn fixed_point_when_two_coordinates_vanish() {
        let g = geom((1, 0), (1, 1));
        let out = flow_canonical(&g, [0.0, 0.0, 0.7], 5.0).unwrap();
        assert_eq!(out.state, [0.0, 0.0, 0.7]);
    }

    #[test]
    fn params_reproduce_start() {
        let key = TriadKey::new(LatticeIndex::new(1, 0), LatticeIndex::new(1, 1), Family::Aaa).unwrap();
        for start in [[0.3, -0.5, 0.8], [0.9, 0.2, -0.1], [-0.6, 0.4, 0.3]] {
            let p = triad_params(start[0], start[1], start[2], &key).unwrap();
            assert!(p.rho < 1.0 && p.rho > 0.0);
            let x2 = p.kappa1 * (1.0 - p.gamma1 * start[1] * start[1]);
            let z2 = p.kappa2 * (1.0 - p.gamma2 * start[1] * start[1]);
            assert!((x2 - start[0] * start[0]).abs() < 1e-12);
            assert!((z2 - start[2] * start[2]).abs() < 1e-12);
            let orbit = TriadOrbit::new(&TriadGeometry::from_key(&key), start).unwrap();
            let back = orbit.eval(0.0);
            for i in 0..3 {
                assert!((back[i] - start[i]).abs() < 1e-12, "{back:?} vs {start:?}");
            }
        }
    }

    #[test]
    fn a1_branch_bounds() {
        // E below ℰ/|k|^2: z carries enough enstrophy.
        let key = TriadKey::new(LatticeIndex::new(1, 0), LatticeIndex::new(1, 1), Family::Aaa).unwrap();
        let p = triad_params(0.1, 0.5, 0.8, &key).unwrap();
        assert!(matches!(p.branch, Branch::A1 { .. }));
        assert!(p.gamma1 >= 1.0 / p.enstrophy);
        assert!(p.gamma2 <= 1.0 / p.enstrophy);
        assert!((p.rho - p.gamma2 / p.gamma1).abs() < 1e-14);
    }

    #[test]
    fn separatrix_is_reported() {
        let key = TriadKey::new(LatticeIndex::new(1, 0), LatticeIndex::new(1, 1), Family::Aaa).unwrap();
        // A z^2 = B x^2 with A = 0.3, B = 0.5.
        let x = 0.3f64.sqrt();
        let z = 0.5f64.sqrt();
        let err = triad_params(x, 0.2, z, &key);
        let g = TriadGeometry::from_key(&key);
        let gap = diff_of_weighted_squares(g.a(), z, g.b(), x);
        if gap.abs() <= INTERFACE_TOL {
            assert!(matches!(err, Err(SplitError::InterfaceDegenerate { .. })));
            assert!(flow_canonical(&g, [x, 0.2, z], 1.0).unwrap().used_fallback);
        }
    }
}
