//! Seed derivation.
//!
//! `mix(seed, k)` is the `k + 1`-th output of a SplitMix64 generator started
//! at `seed`: add `(k + 1) * 0x9E3779B97F4A7C15`, then apply the SplitMix64
//! finalizer. Distinct `k` give statistically independent 64-bit seeds, and
//! the map is a bijection in `seed` for fixed `k`.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn mix(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_add(1).wrapping_mul(GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Permanent-random-number stream of a run.
pub fn sampler_seed(run_seed: u64) -> u64 {
    mix(run_seed, 0)
}

/// FTPL noise stream of a run.
pub fn ftpl_seed(run_seed: u64) -> u64 {
    mix(run_seed, 1)
}

/// Run seed of sweep cell `index`.
pub fn cell_seed(master: u64, index: u64) -> u64 {
    mix(master, index)
}
