//! Seed derivation.
//!
//! Every random stream is a `ChaCha8Rng` seeded with
//! `derive_seed(base, &[tag, k₁, k₂, …])`, where `tag` names the experiment and
//! the `kᵢ` index the job (signal size, member, repetition, δ, …). Each part
//! is folded in with a SplitMix64 finaliser, so streams for different keys are
//! unrelated, and results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TAG_AR_MEMBER: u64 = 0x41_52_4d; // "ARM"
pub const TAG_AR_REPETITION: u64 = 0x41_52_52; // "ARR"
pub const TAG_SPHEROID: u64 = 0x53_50_48; // "SPH"
pub const TAG_MOMENT: u64 = 0x4d_4f_4d; // "MOM"

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(base: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, parts))
}
