//! Counter-based random streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha stream keyed by
//! `(master seed, trial index)`, so ensembles give the same answer no matter
//! how trials are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

pub type ChainRng = ChaCha12Rng;

/// A master seed from which independent per-trajectory substreams derive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSeed(pub u64);

impl StreamSeed {
    pub fn substream(self, index: u64) -> ChainRng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }

    /// A new master seed for a nested family of streams (e.g. one per radius
    /// in a scan). Mixing is a SplitMix64 finalizer.
    pub fn child(self, label: u64) -> StreamSeed {
        let mut z = self
            .0
            .wrapping_add(label.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        StreamSeed(z ^ (z >> 31))
    }
}

/// Uniform draw on the open interval (0, 1) with 53 bits of resolution.
pub fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let bits = rng.next_u64() >> 11;
    (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Exponential duration with mean `mean`, by inversion. Never 0 or infinite.
pub fn exponential<R: RngCore + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    -mean * open_unit(rng).ln()
}

/// Uniform integer in `0..=upper` without modulo bias (Lemire's method).
pub fn uniform_index<R: RngCore + ?Sized>(rng: &mut R, upper: usize) -> usize {
    let range = upper as u64 + 1;
    if range == 0 {
        return rng.next_u64() as usize;
    }
    let threshold = range.wrapping_neg() % range;
    loop {
        let product = (rng.next_u64() as u128) * (range as u128);
        if (product as u64) >= threshold {
            return (product >> 64) as usize;
        }
    }
}

/// Standard normal via Box–Muller (one value per call; the partner is
/// discarded to keep draws-per-call fixed).
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u1 = open_unit(rng);
    let u2 = open_unit(rng);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// A point drawn uniformly from the sphere of the given radius in `dim`
/// dimensions.
pub fn uniform_on_sphere<R: RngCore + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-300 {
            for c in &mut v {
                *c *= radius / norm;
            }
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let seed = StreamSeed(42);
        let a: Vec<u64> = (0..4).map(|_| seed.substream(3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut s0 = seed.substream(0);
        let mut s1 = seed.substream(1);
        assert_ne!(s0.next_u64(), s1.next_u64());
    }

    #[test]
    fn open_unit_never_hits_endpoints() {
        let mut rng = StreamSeed(7).substream(0);
        for _ in 0..100_000 {
            let u = open_unit(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn uniform_index_covers_range() {
        let mut rng = StreamSeed(1).substream(0);
        let mut seen = [false; 5];
        for _ in 0..1000 {
            seen[uniform_index(&mut rng, 4)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn sphere_points_have_requested_radius() {
        let mut rng = StreamSeed(9).substream(2);
        let p = uniform_on_sphere(&mut rng, 48, 123.0);
        let norm = p.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((norm - 123.0).abs() < 1e-9);
    }
}
