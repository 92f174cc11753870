//! Counter-based pseudo-random numbers.
//!
//! Every stream is a pure function of (seed, stream index), so parallel
//! consumers can carve up an index range and still produce results that do
//! not depend on the thread count. SplitMix64 is more than enough for the
//! Monte-Carlo and property-sampling uses in this crate.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Stream `index` of a seeded family; distinct indices give streams with
    /// no structural overlap.
    pub fn stream(seed: u64, index: u64) -> Self {
        SplitMix64 {
            state: mix(seed).wrapping_add(mix(index.wrapping_mul(GOLDEN) ^ 0x5851_f42d_4c95_7f2d)),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform in [0, 1) with 53 bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in [lo, hi).
    #[inline]
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, bound).
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        // Multiply-shift; bias is < 2^-64 per draw, irrelevant here.
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}
