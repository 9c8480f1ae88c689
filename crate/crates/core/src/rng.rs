//! Keyed, reproducible random number generation.
//!
//! Every stochastic step derives a fresh ChaCha8 stream from an explicit
//! integer key, so draws depend only on the key and never on call order or
//! thread scheduling. Bounded integer draws use an unbiased rejection step.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Domain separators so different pipeline stages never share a stream.
pub(crate) mod domain {
    pub const REPLICATE_STRATUM: u64 = 1;
    pub const REPLICATE_UNIT: u64 = 2;
    pub const POPULATION: u64 = 3;
    pub const SAMPLE_STAGE1: u64 = 4;
    pub const SAMPLE_STAGE2: u64 = 5;
    pub const RUN_STREAM: u64 = 6;
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Collapses a key into a single word (splitmix64 absorption).
pub fn derive_u64(key: &[u64]) -> u64 {
    let mut h = 0x6A09_E667_F3BC_C909u64;
    for &k in key {
        h = mix(h.wrapping_add(GOLDEN).wrapping_add(k));
    }
    h
}

/// Builds a ChaCha8 generator fully determined by `key`.
pub fn keyed_rng(key: &[u64]) -> ChaCha8Rng {
    let mut s = derive_u64(key);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        s = mix(s.wrapping_add(GOLDEN));
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Uniform draw from `0..bound` without modulo bias (Lemire's method with
/// a rejection loop).
#[inline]
pub fn uniform_index<R: RngCore>(rng: &mut R, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let mut x = rng.next_u64();
    let mut m = (x as u128) * (bound as u128);
    let mut lo = m as u64;
    if lo < bound {
        let t = bound.wrapping_neg() % bound;
        while lo < t {
            x = rng.next_u64();
            m = (x as u128) * (bound as u128);
            lo = m as u64;
        }
    }
    (m >> 64) as u64
}

/// Simple random sample without replacement: `k` distinct indices from
/// `0..n`, returned in ascending order. Partial Fisher-Yates shuffle.
pub fn sample_without_replacement<R: RngCore>(rng: &mut R, k: usize, n: usize) -> Vec<u32> {
    assert!(k <= n, "cannot draw {k} from {n} without replacement");
    let mut pool: Vec<u32> = (0..n as u32).collect();
    for i in 0..k {
        let j = i + uniform_index(rng, (n - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut picked = pool[..k].to_vec();
    picked.sort_unstable();
    picked
}

/// Uniform draw on the open interval (0, 1) with 53-bit resolution.
#[inline]
pub fn unit_uniform_open<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard normal draw via the inverse-CDF transform.
#[inline]
pub fn std_normal_draw<R: RngCore>(rng: &mut R) -> f64 {
    crate::normal::std_normal_quantile(unit_uniform_open(rng))
        .expect("open-interval uniform is a valid probability")
}

#[inline]
pub fn bernoulli<R: RngCore>(rng: &mut R, p: f64) -> bool {
    unit_uniform_open(rng) < p
}
