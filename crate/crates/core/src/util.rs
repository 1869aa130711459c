//! Small shared helpers: sorted merges, deterministic pseudo-randomness.

use alloc::vec::Vec;

/// Merge, sort and deduplicate float point sets. Exact equality is the right
/// notion here: the crate keeps dyadic breakpoints bit-exact.
pub fn sorted_dedup(mut points: Vec<f64>) -> Vec<f64> {
    points.sort_by(|a, b| a.partial_cmp(b).expect("NaN in point set"));
    points.dedup();
    points
}

/// Largest power-of-two step `2^-m <= limit` (with `m` capped at 60).
pub fn dyadic_step_at_most(limit: f64) -> f64 {
    let mut step = 1.0f64;
    let mut m = 0;
    while step > limit && m < 60 {
        step *= 0.5;
        m += 1;
    }
    step
}

/// SplitMix64: tiny deterministic generator for sample vectors used by the
/// empirical checkers. Not exposed; CLI and tests seed it explicitly.
#[derive(Clone, Debug)]
#[cfg_attr(not(test), allow(dead_code))]
pub struct SplitMix64 {
    state: u64,
}

#[cfg_attr(not(test), allow(dead_code))]

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0,1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform choice of an index `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Random sign.
    pub fn sign(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}
