//! Deterministic seeded randomness.
//!
//! Everything downstream (generation, experiments) promises byte-identical
//! results for identical seeds, across runs, platforms and worker counts, so
//! we use a fixed, self-contained generator instead of an external RNG crate
//! whose stream could change between versions.
//!
//! [`SplitMix64`] is the standard 64-bit splittable generator of Steele,
//! Lea and Flood; [`mix`]/[`mix3`] reuse its finalizer to derive independent
//! per-trial stream seeds from `(master_seed, cell, trial)` keys.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: a bijective avalanche mix of one 64-bit word.
#[inline]
fn fmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a stream seed from a base seed and one key word.
#[inline]
pub fn mix(seed: u64, key: u64) -> u64 {
    fmix64(
        seed.wrapping_add(GOLDEN_GAMMA)
            .wrapping_add(key.wrapping_mul(0xBF58_476D_1CE4_E5B9)),
    )
}

/// Derive a stream seed from a base seed and two key words, e.g.
/// `(master_seed, cell_index, trial_index)`.
#[inline]
pub fn mix3(seed: u64, a: u64, b: u64) -> u64 {
    mix(mix(seed, a), b)
}

/// SplitMix64 pseudo-random stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        fmix64(self.state)
    }

    /// Uniform draw from `0..bound` without modulo bias (rejection sampling).
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "next_below: bound must be positive");
        // Reject the low `2^64 mod bound` values so the remainder is uniform.
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % bound;
            }
        }
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}
