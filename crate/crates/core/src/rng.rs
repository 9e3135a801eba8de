//! Deterministic keyed random streams.
//!
//! Every random consumer (a particle's walk, its recovery marks, the initial
//! occupancy of a site, a cell's distinguished path) draws from its own
//! stream, seeded by hashing `(master_seed, purpose, key)`. Two simulations
//! that share a master seed therefore see identical randomness for every
//! consumer they have in common, which is what makes the couplings exact.

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::{Distribution, Exp1};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Domain-separation tag for a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Purpose {
    Walk,
    Recovery,
    Initial,
    DistinguishedPath,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Walk => 0x5741_4c4b,
            Purpose::Recovery => 0x5245_434f,
            Purpose::Initial => 0x494e_4954,
            Purpose::DistinguishedPath => 0x4449_5354,
        }
    }
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a master seed and a word sequence into one 64-bit value.
pub fn derive_seed(master_seed: u64, words: &[i64]) -> u64 {
    let mut h = mix64(master_seed ^ GOLDEN);
    h = mix64(h.wrapping_add(words.len() as u64).wrapping_mul(GOLDEN));
    for &w in words {
        h = mix64(h ^ mix64((w as u64).wrapping_add(GOLDEN)));
    }
    h
}

/// A reproducible random stream keyed by `(master_seed, purpose, key)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    purpose: Purpose,
    key: Vec<i64>,
    rng: Xoshiro256PlusPlus,
}

impl RngStream {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn purpose(&self) -> Purpose {
        self.purpose
    }

    pub fn key(&self) -> &[i64] {
        &self.key
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Uniform integer in `0..n`.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        self.rng.random_range(0..n)
    }

    /// Standard exponential variate (mean 1).
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Build the stream for `(master_seed, purpose, key)`.
pub fn make_stream(master_seed: u64, purpose: Purpose, key: &[i64]) -> RngStream {
    let mut words = Vec::with_capacity(key.len() + 1);
    words.push(purpose.tag() as i64);
    words.extend_from_slice(key);
    let mut s = derive_seed(master_seed, &words);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        s = s.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&mix64(s).to_le_bytes());
    }
    RngStream {
        master_seed,
        purpose,
        key: key.to_vec(),
        rng: Xoshiro256PlusPlus::from_seed(seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn first(stream: &mut RngStream, n: usize) -> Vec<u64> {
        (0..n).map(|_| stream.next_u64()).collect()
    }

    #[test]
    fn same_key_same_output() {
        let mut a = make_stream(42, Purpose::Walk, &[3, -1, 7]);
        let mut b = make_stream(42, Purpose::Walk, &[3, -1, 7]);
        assert_eq!(first(&mut a, 100), first(&mut b, 100));
    }

    #[test]
    fn purposes_are_separated() {
        let mut a = make_stream(42, Purpose::Walk, &[0, 1]);
        let mut b = make_stream(42, Purpose::Recovery, &[0, 1]);
        assert_ne!(first(&mut a, 100), first(&mut b, 100));
    }

    #[test]
    fn distinct_keys_do_not_collide() {
        let mut seen = HashSet::new();
        for k in 0..10_000i64 {
            let mut s = make_stream(7, Purpose::Initial, &[k, 0]);
            assert!(seen.insert(first(&mut s, 4)), "collision at key {k}");
        }
        // Key length is part of the hash.
        let mut a = make_stream(7, Purpose::Initial, &[0]);
        let mut b = make_stream(7, Purpose::Initial, &[0, 0]);
        assert_ne!(first(&mut a, 4), first(&mut b, 4));
    }

    const PINNED_U64: u64 = 2_205_867_665_458_808_907;
    const PINNED_SEED: u64 = 10_505_910_081_238_556_157;

    #[test]
    fn pinned_output_is_stable() {
        // Regression pin: streams must not change between builds or platforms.
        let mut s = make_stream(1, Purpose::Walk, &[0, 1]);
        assert_eq!(s.next_u64(), PINNED_U64);
        assert_eq!(derive_seed(0, &[]), PINNED_SEED);
    }

    #[test]
    fn exp1_mean_is_one() {
        let mut s = make_stream(3, Purpose::Recovery, &[1]);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| s.exp1()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 4.0 / (n as f64).sqrt(), "{mean}");
    }
}
