use serde::{Deserialize, Serialize};

use super::lattice::{build_index_set, enumerate_triads, inv_diff, LatticeIndex, Part, TriadKey};
use super::triad::{flow_canonical, TriadFlow, TriadGeometry};
use crate::error::{invalid, Result, SplitError};
use crate::splitting::{norm, RegionSpec, Splitting};

/// A state `q = (a, b)` split into its cosine and sine blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalerkinState {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl GalerkinState {
    pub fn from_flat(q: &[f64]) -> Result<Self> {
        if q.len() % 2 != 0 {
            return invalid("flat Galerkin state must have even length");
        }
        let (a, b) = q.split_at(q.len() / 2);
        Ok(GalerkinState { a: a.to_vec(), b: b.to_vec() })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut q = self.a.clone();
        q.extend_from_slice(&self.b);
        q
    }
}

/// What a field of the Euler splitting is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EulerField<'a> {
    Damp,
    /// Forcing field `ℓ`, 1-based.
    Force(usize),
    Triad(&'a TriadKey),
}

/// Which damping/forcing hypothesis the system meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    DF1,
    DF2,
    Neither,
}

#[derive(Debug, Clone)]
struct TriadSlots {
    idx: [usize; 3],
    z_sign: f64,
    geom: TriadGeometry,
}

/// The truncated system: lattice, damping rates, forcing vectors and triads.
///
/// Field order: `0` is damping, `1..=m` are the forcing fields, then four
/// fields (`aaa`, `abb`, `bab`, `bba`) per triad.
#[derive(Debug, Clone)]
pub struct EulerSystem {
    n: usize,
    indices: Vec<LatticeIndex>,
    damping: Vec<f64>,
    forcing: Vec<Vec<f64>>,
    triads: Vec<TriadKey>,
    slots: Vec<TriadSlots>,
}

impl EulerSystem {
    /// `damping` lists `(mode, λ)` with `λ > 0`; each forcing vector is
    /// dense with length `d = 2N(N+2)`.
    pub fn new(n: usize, damping: &[(LatticeIndex, f64)], forcing: Vec<Vec<f64>>) -> Result<Self> {
        let indices = build_index_set(n)?;
        let half = indices.len();
        let mut rates = vec![0.0; half];
        for &(j, lambda) in damping {
            if !(lambda > 0.0) || !lambda.is_finite() {
                return invalid(format!("damping rate for {j} must be positive, got {lambda}"));
            }
            let p = position(n, j).ok_or_else(|| SplitError::InvalidArgument(format!("damped mode {j} is outside the lattice")))?;
            rates[p] = lambda;
        }
        for (ell, beta) in forcing.iter().enumerate() {
            if beta.len() != 2 * half {
                return invalid(format!("forcing vector {} has length {}, expected {}", ell + 1, beta.len(), 2 * half));
            }
            if beta.iter().any(|v| !v.is_finite()) {
                return invalid(format!("forcing vector {} is not finite", ell + 1));
            }
        }
        let triads = enumerate_triads(&indices);
        let slots = triads
            .iter()
            .map(|key| {
                let (parts, z_sign) = key.family.slots();
                let at = |m: LatticeIndex, part: Part| {
                    let p = position(n, m).expect("triad modes lie in the lattice");
                    match part {
                        Part::A => p,
                        Part::B => half + p,
                    }
                };
                TriadSlots {
                    idx: [at(key.j, parts[0]), at(key.k, parts[1]), at(key.l, parts[2])],
                    z_sign,
                    geom: TriadGeometry::from_key(key),
                }
            })
            .collect();
        Ok(EulerSystem { n, indices, damping: rates, forcing, triads, slots })
    }

    /// Forcing given sparsely as `(ℓ, mode, part, value)` with 1-based `ℓ`.
    pub fn with_sparse_forcing(
        n: usize,
        damping: &[(LatticeIndex, f64)],
        num_forcing: usize,
        entries: &[(usize, LatticeIndex, Part, f64)],
    ) -> Result<Self> {
        let half = build_index_set(n)?.len();
        let mut forcing = vec![vec![0.0; 2 * half]; num_forcing];
        for &(ell, j, part, value) in entries {
            if ell == 0 || ell > num_forcing {
                return invalid(format!("forcing index {ell} outside 1..={num_forcing}"));
            }
            let p = position(n, j).ok_or_else(|| SplitError::InvalidArgument(format!("forced mode {j} is outside the lattice")))?;
            let slot = match part {
                Part::A => p,
                Part::B => half + p,
            };
            forcing[ell - 1][slot] = value;
        }
        Self::new(n, damping, forcing)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// State dimension `2N(N+2)`.
    pub fn dim(&self) -> usize {
        2 * self.indices.len()
    }

    pub fn indices(&self) -> &[LatticeIndex] {
        &self.indices
    }

    pub fn triads(&self) -> &[TriadKey] {
        &self.triads
    }

    pub fn num_forcing(&self) -> usize {
        self.forcing.len()
    }

    pub fn forcing(&self, ell: usize) -> &[f64] {
        &self.forcing[ell - 1]
    }

    pub fn damping_rate(&self, j: LatticeIndex) -> f64 {
        self.position(j).map_or(0.0, |p| self.damping[p])
    }

    pub fn damped_modes(&self) -> Vec<LatticeIndex> {
        self.indices.iter().zip(&self.damping).filter(|(_, l)| **l > 0.0).map(|(j, _)| *j).collect()
    }

    pub fn position(&self, j: LatticeIndex) -> Option<usize> {
        position(self.n, j)
    }

    /// Flat index of `a_j` or `b_j`.
    pub fn slot(&self, j: LatticeIndex, part: Part) -> Option<usize> {
        self.position(j).map(|p| match part {
            Part::A => p,
            Part::B => self.indices.len() + p,
        })
    }

    pub fn field_kind(&self, field: usize) -> EulerField<'_> {
        match field {
            0 => EulerField::Damp,
            f if f <= self.forcing.len() => EulerField::Force(f),
            f => EulerField::Triad(&self.triads[f - 1 - self.forcing.len()]),
        }
    }

    /// Field id of the first triad field.
    pub fn first_triad_field(&self) -> usize {
        1 + self.forcing.len()
    }

    /// Field id of a given triad key.
    pub fn triad_field(&self, key: &TriadKey) -> Option<usize> {
        self.triads.iter().position(|t| t == key).map(|p| p + self.first_triad_field())
    }

    pub fn damp_flow(&self, q: &mut [f64], t: f64) {
        let half = self.indices.len();
        for (p, &lambda) in self.damping.iter().enumerate() {
            if lambda > 0.0 {
                let f = (-lambda * t).exp();
                q[p] *= f;
                q[half + p] *= f;
            }
        }
    }

    /// `q + t β^ℓ`, with 1-based `ℓ`.
    pub fn force_flow(&self, q: &mut [f64], t: f64, ell: usize) {
        for (qi, b) in q.iter_mut().zip(&self.forcing[ell - 1]) {
            *qi += t * b;
        }
    }

    /// Flow of the triad field with position `index` in [`Self::triads`].
    pub fn triad_flow(&self, q: &mut [f64], index: usize, t: f64) -> Result<TriadFlow> {
        let s = &self.slots[index];
        let start = [q[s.idx[0]], q[s.idx[1]], s.z_sign * q[s.idx[2]]];
        let out = flow_canonical(&s.geom, start, t)?;
        q[s.idx[0]] = out.state[0];
        q[s.idx[1]] = out.state[1];
        q[s.idx[2]] = s.z_sign * out.state[2];
        Ok(out)
    }

    /// Coordinates `(X, Y, Z)` of a triad field at `q`.
    pub fn triad_coordinates(&self, q: &[f64], index: usize) -> [f64; 3] {
        let s = &self.slots[index];
        [q[s.idx[0]], q[s.idx[1]], s.z_sign * q[s.idx[2]]]
    }

    /// The Galerkin right-hand side, assembled mode by mode from the
    /// convolution sums rather than from the triad fields.
    pub fn full_rhs(&self, q: &[f64], out: &mut [f64]) {
        let half = self.indices.len();
        let (a, b) = q.split_at(half);
        for (pm, &m) in self.indices.iter().enumerate() {
            let (mut da, mut db) = (0.0, 0.0);
            for (pp, &p) in self.indices.iter().enumerate() {
                if m.cross(p) == 0 {
                    continue;
                }
                // m + p = l: m exchanges with the pair (p, l).
                if let Some(pl) = self.position(m.add(p)) {
                    let th = super::lattice::theta(p, m.add(p));
                    da += th * (a[pp] * a[pl] + b[pp] * b[pl]);
                    db += th * (a[pp] * b[pl] - b[pp] * a[pl]);
                }
                // p + r = m with r = m - p, each unordered pair once.
                let r = LatticeIndex::new(m.j1 - p.j1, m.j2 - p.j2);
                if p < r {
                    if let Some(pr) = self.position(r) {
                        let th = super::lattice::theta(p, r);
                        da += th * (b[pp] * b[pr] - a[pp] * a[pr]);
                        db -= th * (a[pp] * b[pr] + b[pp] * a[pr]);
                    }
                }
            }
            out[pm] = da - self.damping[pm] * a[pm];
            out[half + pm] = db - self.damping[pm] * b[pm];
        }
        for beta in &self.forcing {
            for (o, v) in out.iter_mut().zip(beta) {
                *o += v;
            }
        }
    }

    /// Whether the damped modes carry at least an `eta` share of `|q|^2`.
    pub fn in_dissipative_region(&self, q: &[f64], eta: f64) -> bool {
        let half = self.indices.len();
        let scale = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return true;
        }
        let mut damped = 0.0;
        let mut total = 0.0;
        for p in 0..half {
            let e = (q[p] / scale).powi(2) + (q[half + p] / scale).powi(2);
            total += e;
            if self.damping[p] > 0.0 {
                damped += e;
            }
        }
        damped >= eta * total
    }

    pub fn dissipative_region(self: &std::sync::Arc<Self>, eta: f64) -> RegionSpec {
        let sys = self.clone();
        RegionSpec::new(format!("D_eta(eta={eta})"), move |q| sys.in_dissipative_region(q, eta))
    }

    /// Both non-resonance discriminants for `(j, k, l)` under forcing `ℓ`.
    pub fn nonresonance_deltas(&self, j: LatticeIndex, k: LatticeIndex, l: LatticeIndex, ell: usize) -> (f64, f64) {
        let beta = &self.forcing[ell - 1];
        let get = |m: LatticeIndex, part: Part| self.slot(m, part).map_or(0.0, |s| beta[s]);
        deltas(j, k, l, get(j, Part::A), get(l, Part::A), get(l, Part::B))
    }

    /// Some forcing field pushes `a_j` and keeps both discriminants away from
    /// zero for every admissible `(k, l)`.
    pub fn is_nonresonant(&self, j: LatticeIndex) -> bool {
        let Some(pj) = self.slot(j, Part::A) else {
            return false;
        };
        (1..=self.forcing.len()).any(|ell| {
            if self.forcing[ell - 1][pj] == 0.0 {
                return false;
            }
            self.indices.iter().all(|&k| {
                let l = j.add(k);
                if k.norm2() == j.norm2() || self.position(l).is_none() {
                    return true;
                }
                let (d1, d2) = self.nonresonance_deltas(j, k, l, ell);
                let beta = &self.forcing[ell - 1];
                let scale = |bl: f64| {
                    beta[pj].powi(2) * inv_diff(j.norm2(), k.norm2()).abs() + bl * bl * inv_diff(k.norm2(), l.norm2()).abs()
                };
                let bal = self.slot(l, Part::A).map_or(0.0, |s| beta[s]);
                let bbl = self.slot(l, Part::B).map_or(0.0, |s| beta[s]);
                d1.abs() > 1e-14 * scale(bal) && d2.abs() > 1e-14 * scale(bbl)
            })
        })
    }

    pub fn check_assumption(&self) -> Assumption {
        let m = |a: i64, b: i64| LatticeIndex::new(a, b);
        let nn = self.n as i64;
        let forced = |j: LatticeIndex| self.is_nonresonant(j);
        let damped = |j: LatticeIndex| self.damping_rate(j) > 0.0;
        let low_forced = forced(m(0, 1)) && forced(m(1, 0));
        if low_forced && damped(m(1, 0)) && damped(m(0, 1)) && damped(m(nn, nn)) {
            return Assumption::DF1;
        }
        if low_forced && forced(m(1, 1)) && damped(m(nn, nn)) && (damped(m(1, 0)) || damped(m(0, 1))) {
            return Assumption::DF2;
        }
        Assumption::Neither
    }
}

fn position(n: usize, j: LatticeIndex) -> Option<usize> {
    j.in_box(n).then(|| (j.j1 * (n as i64 + 1) + j.j2 - 1) as usize)
}

fn deltas(j: LatticeIndex, k: LatticeIndex, l: LatticeIndex, baj: f64, bal: f64, bbl: f64) -> (f64, f64) {
    let first = baj * baj * inv_diff(j.norm2(), k.norm2());
    let kl = inv_diff(k.norm2(), l.norm2());
    (first - bal * bal * kl, first - bbl * bbl * kl)
}

/// Discriminants `Δ¹ = β_{a_j}^2 (1/|j|^2 - 1/|k|^2) - β_{a_l}^2 (1/|k|^2 - 1/|l|^2)`
/// and `Δ²` (with `β_{b_l}` in place of `β_{a_l}`) for one dense forcing
/// vector of length `2N(N+2)`.
pub fn nonresonance_deltas(j: LatticeIndex, k: LatticeIndex, l: LatticeIndex, beta: &[f64]) -> Result<(f64, f64)> {
    let half = beta.len() / 2;
    let n = ((half as f64 + 1.0).sqrt() - 1.0).round() as usize;
    if n * (n + 2) != half || beta.len() % 2 != 0 {
        return invalid(format!("forcing vector length {} is not 2N(N+2)", beta.len()));
    }
    let get = |m: LatticeIndex, off: usize| position(n, m).map_or(0.0, |p| beta[off + p]);
    Ok(deltas(j, k, l, get(j, 0), get(l, 0), get(l, half)))
}

/// `min{(1/|j|^2 - 1/|k|^2), (1/|k|^2 - 1/|l|^2)} / (2d)`, for strictly
/// increasing norms.
pub fn zeta0(j: LatticeIndex, k: LatticeIndex, l: LatticeIndex, d: usize) -> Result<f64> {
    let (nj, nk, nl) = (j.norm2(), k.norm2(), l.norm2());
    if !(nj < nk && nk < nl) {
        return invalid(format!("zeta0 needs |j| < |k| < |l|, got {j}, {k}, {l}"));
    }
    if d == 0 {
        return invalid("dimension must be positive");
    }
    Ok(inv_diff(nj, nk).min(inv_diff(nk, nl)) / (2.0 * d as f64))
}

impl Splitting for EulerSystem {
    fn dim(&self) -> usize {
        EulerSystem::dim(self)
    }

    fn num_fields(&self) -> usize {
        1 + self.forcing.len() + self.triads.len()
    }

    fn flow(&self, field: usize, x: &mut [f64], t: f64) -> Result<()> {
        match field {
            0 => self.damp_flow(x, t),
            f if f <= self.forcing.len() => self.force_flow(x, t, f),
            f => {
                self.triad_flow(x, f - self.first_triad_field(), t)?;
            }
        }
        Ok(())
    }

    fn eval_field(&self, field: usize, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        match field {
            0 => {
                let half = self.indices.len();
                for (p, &lambda) in self.damping.iter().enumerate() {
                    out[p] = -lambda * x[p];
                    out[half + p] = -lambda * x[half + p];
                }
            }
            f if f <= self.forcing.len() => out.copy_from_slice(&self.forcing[f - 1]),
            f => {
                let s = &self.slots[f - self.first_triad_field()];
                let v = s.geom.field([x[s.idx[0]], x[s.idx[1]], s.z_sign * x[s.idx[2]]]);
                out[s.idx[0]] = v[0];
                out[s.idx[1]] = v[1];
                out[s.idx[2]] = s.z_sign * v[2];
            }
        }
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        self.full_rhs(x, out);
    }

    fn field_label(&self, field: usize) -> String {
        match self.field_kind(field) {
            EulerField::Damp => "damp".into(),
            EulerField::Force(ell) => format!("force{ell}"),
            EulerField::Triad(k) => format!("{}:{}{}{}", k.family.label(), k.j, k.k, k.l),
        }
    }
}

/// `H(q) = |q| + 1`.
pub fn lyapunov_h(q: &[f64]) -> f64 {
    norm(q) + 1.0
}
