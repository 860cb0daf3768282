use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A wave vector `(j1, j2)` of the truncated lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeIndex {
    pub j1: i64,
    pub j2: i64,
}

impl LatticeIndex {
    pub const fn new(j1: i64, j2: i64) -> Self {
        LatticeIndex { j1, j2 }
    }

    pub fn norm2(self) -> i64 {
        self.j1 * self.j1 + self.j2 * self.j2
    }

    /// `j^perp = (j2, -j1)`.
    pub fn perp(self) -> LatticeIndex {
        LatticeIndex::new(self.j2, -self.j1)
    }

    pub fn dot(self, other: LatticeIndex) -> i64 {
        self.j1 * other.j1 + self.j2 * other.j2
    }

    /// `self . other^perp`.
    pub fn cross(self, other: LatticeIndex) -> i64 {
        self.dot(other.perp())
    }

    pub fn add(self, other: LatticeIndex) -> LatticeIndex {
        LatticeIndex::new(self.j1 + other.j1, self.j2 + other.j2)
    }

    pub fn in_box(self, n: usize) -> bool {
        let n = n as i64;
        (self.j1, self.j2) != (0, 0) && (0..=n).contains(&self.j1) && (0..=n).contains(&self.j2)
    }
}

impl fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j1, self.j2)
    }
}

/// All nonzero `(j1, j2)` with `0 <= j1, j2 <= N`, in lexicographic order.
pub fn build_index_set(n: usize) -> Result<Vec<LatticeIndex>> {
    if n < 4 {
        return invalid(format!("truncation N must be at least 4, got {n}"));
    }
    let n = n as i64;
    Ok((0..=n)
        .flat_map(|j1| (0..=n).map(move |j2| LatticeIndex::new(j1, j2)))
        .filter(|j| (j.j1, j.j2) != (0, 0))
        .collect())
}

/// `1/a - 1/b` for positive integers, from the exact integer numerator.
pub(crate) fn inv_diff(a: i64, b: i64) -> f64 {
    (b - a) as f64 / (a as f64 * b as f64)
}

/// `theta_kl = (k . l^perp) / (4 pi) * (1/|k|^2 - 1/|l|^2)`.
pub fn theta(k: LatticeIndex, l: LatticeIndex) -> f64 {
    let cross = k.cross(l);
    if cross == 0 {
        return 0.0;
    }
    cross as f64 / (4.0 * PI) * inv_diff(k.norm2(), l.norm2())
}

/// Which three coordinates a triad field couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Aaa,
    Abb,
    Bab,
    Bba,
}

/// Cosine or sine block of the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    A,
    B,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Aaa, Family::Abb, Family::Bab, Family::Bba];

    /// Blocks holding `X`, `Y`, `Z`, and the sign relating `Z` to its
    /// coordinate (`Z = -a_l` for `bba`).
    pub fn slots(self) -> ([Part; 3], f64) {
        use Part::{A, B};
        match self {
            Family::Aaa => ([A, A, A], 1.0),
            Family::Abb => ([A, B, B], 1.0),
            Family::Bab => ([B, A, B], 1.0),
            Family::Bba => ([B, B, A], -1.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::Aaa => "aaa",
            Family::Abb => "abb",
            Family::Bab => "bab",
            Family::Bba => "bba",
        }
    }
}

/// One triad field: wave vectors `j`, `k`, `l = j + k` and a family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TriadKey {
    pub j: LatticeIndex,
    pub k: LatticeIndex,
    pub l: LatticeIndex,
    pub family: Family,
}

impl TriadKey {
    pub fn new(j: LatticeIndex, k: LatticeIndex, family: Family) -> Result<Self> {
        if j.cross(k) == 0 {
            return invalid(format!("{j} and {k} are parallel"));
        }
        Ok(TriadKey { j, k, l: j.add(k), family })
    }
}

/// Every unordered pair `{j, k}` (with `j < k` lexicographically) such that
/// `j + k` stays in the box and `j`, `k` are not parallel, times the four
/// families.
pub fn enumerate_triads(indices: &[LatticeIndex]) -> Vec<TriadKey> {
    let n = indices.iter().map(|j| j.j1.max(j.j2)).max().unwrap_or(0) as usize;
    let mut out = Vec::new();
    for (p, &j) in indices.iter().enumerate() {
        for &k in &indices[p + 1..] {
            let l = j.add(k);
            if j.cross(k) != 0 && l.in_box(n) {
                for family in Family::ALL {
                    out.push(TriadKey { j, k, l, family });
                }
            }
        }
    }
    out
}
