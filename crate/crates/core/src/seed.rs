//! Counter-based seed derivation.
//!
//! Every random stream in the crate is seeded from one master seed through
//! [`derive_trial_seed`]. The mixing function is the SplitMix64 finalizer,
//! a bijection on `u64`, so for a fixed master seed and label distinct trial
//! indices can never collide.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a; fixed constants keep labels stable across platforms and releases.
fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seed for trial `trial_index` of the stream named `stream_label`.
pub fn derive_trial_seed(master_seed: u64, stream_label: &str, trial_index: u64) -> u64 {
    let stream = mix64(master_seed ^ mix64(label_hash(stream_label)));
    mix64(stream.wrapping_add(trial_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Generator used for every draw in the crate.
pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
