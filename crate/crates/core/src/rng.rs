//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] built here.
//! Sub-streams (one per tree, per one-vs-rest problem, per fold) get their
//! own seed through [`derive_seed`] so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for sub-stream `stream` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix64(mix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15)) ^ stream.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Named stream tags so unrelated consumers of one seed never collide.
pub mod stream {
    pub const STRATIFY_RESHUFFLE: u64 = 0x5354_5241_5400_0000;
    pub const EVAL_SUBSAMPLE: u64 = 0x5355_4253_0000_0000;
    pub const FOLDS: u64 = 0x464f_4c44_0000_0000;
    pub const MINIBATCH: u64 = 0x4d49_4e49_0000_0000;
    pub const SVM: u64 = 0x5356_4d00_0000_0000;
    pub const FOREST: u64 = 0x5246_0000_0000_0000;
}
