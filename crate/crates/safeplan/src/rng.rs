//! Seedable, splittable random streams.
//!
//! Every stochastic operation in this crate takes an explicit stream. A
//! stream is derived from a master seed plus a path of indices, so parallel
//! work items (experiment runs, sampled instances) each own an independent
//! generator and results never depend on scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The concrete generator handed to all samplers. ChaCha output is stable
/// across platforms and releases, which the byte-determinism contract needs.
pub type Stream = ChaCha12Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives the stream identified by `path` under `master`. Distinct paths
/// give statistically independent streams; equal inputs give equal streams.
pub fn stream(master: u64, path: &[u64]) -> Stream {
    let mut acc = splitmix64(master);
    for &p in path {
        acc = splitmix64(acc ^ splitmix64(p.wrapping_add(0xa076_1d64_78bd_642f)));
    }
    let mut seed = [0u8; 32];
    for (i, chunk) in seed.chunks_exact_mut(8).enumerate() {
        acc = splitmix64(acc.wrapping_add(i as u64 + 1));
        chunk.copy_from_slice(&acc.to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}
