//! Seeded generators. Every random draw in the crate goes through [`stream`]
//! so that a `(seed, purpose)` pair always yields the same sequence.

use rand_pcg::Pcg64;

/// Independent purposes get independent PCG streams for the same seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    WeightInit = 1,
    Sampling = 2,
    Display = 3,
    Permutation = 4,
    Probe = 5,
}

pub fn stream(seed: u64, purpose: Purpose) -> Pcg64 {
    // splitmix64 finalizer spreads small consecutive seeds over the state space.
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    let state = ((z as u128) << 64) | seed as u128;
    Pcg64::new(state, purpose as u128)
}
