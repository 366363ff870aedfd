//! Seed derivation.
//!
//! All randomness in a run flows from one root seed. Components draw from
//! named sub-streams (`"benchmark"`, `"pretrain"`, `"ttt-a"`, ...) so each
//! stage can be re-run independently without disturbing the others, and
//! per-index streams let data-parallel loops produce the same output as a
//! sequential pass.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed of the named sub-stream under `root`.
pub fn stream_seed(root: u64, name: &str) -> u64 {
    splitmix64(root ^ splitmix64(fnv1a(name.as_bytes())))
}

/// RNG for the named sub-stream.
pub fn stream(root: u64, name: &str) -> Stream {
    Stream::seed_from_u64(stream_seed(root, name))
}

/// Seed of element `index` within a named sub-stream.
pub fn indexed_seed(root: u64, name: &str, index: u64) -> u64 {
    splitmix64(stream_seed(root, name) ^ splitmix64(index.wrapping_add(1)))
}

/// Per-index RNG within a named sub-stream.
pub fn indexed(root: u64, name: &str, index: u64) -> Stream {
    Stream::seed_from_u64(indexed_seed(root, name, index))
}
