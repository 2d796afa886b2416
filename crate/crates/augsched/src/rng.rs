//! Deterministic, counter-based randomness.
//!
//! Every randomized run owns a seed; coin flips are keyed by
//! `(seed, domain, counter)` so that inserting unrelated intervals into an
//! instance does not perturb the flips of the others, and Monte Carlo trials
//! can be distributed across threads without changing the aggregate result.

/// SplitMix64 step; a well-mixed 64-bit permutation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless keyed draw: uniform `u64` from `(seed, domain, key)`.
pub fn keyed_u64(seed: u64, domain: u64, key: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(domain)) ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Derives an independent stream seed, e.g. one per Monte Carlo trial.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Sequential SplitMix64 generator for sampling tasks.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `0..bound` (`bound > 0`). Modulo bias is negligible
    /// for the bounds used here and keeps replay trivial.
    pub fn gen_range(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }

    pub fn gen_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Samples `m` distinct indices from `0..n` (partial Fisher-Yates).
    pub fn sample_indices(&mut self, n: usize, m: usize) -> Vec<usize> {
        debug_assert!(m <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..m {
            let j = i + self.gen_range((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(m);
        pool
    }
}

/// Acceptance threshold for a probability, compared against a raw `u64` draw.
///
/// `draw < threshold` accepts with probability `p` up to 2^-64 quantization,
/// with `p = 0` and `p = 1` exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoinThreshold(u128);

impl CoinThreshold {
    /// Builds the threshold from an exact probability in `[0, 1]`.
    pub fn from_probability(p: &crate::rational::Rational) -> Self {
        use num_bigint::BigInt;
        use num_traits::ToPrimitive;
        let scale = BigInt::from(u128::from(u64::MAX)) + 1; // 2^64
        let scaled: BigInt = (p.numer() * scale) / p.denom();
        let threshold = scaled.to_u128().unwrap_or(u128::from(u64::MAX) + 1);
        CoinThreshold(threshold.min(u128::from(u64::MAX) + 1))
    }

    pub fn accepts(&self, draw: u64) -> bool {
        u128::from(draw) < self.0
    }
}
