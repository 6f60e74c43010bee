//! Deterministic stream derivation from a single root seed.
//!
//! Every random stream in the crate is keyed by `(root, purpose, index)`
//! and mixed through SplitMix64, so streams are independent of enumeration
//! order: adding an arm, a policy, or a sweep cell never perturbs the draws
//! of the existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-arm reward streams inside an episode.
pub const STREAM_REWARD: u64 = 1;
/// Per-replication instance draws in the harness.
pub const STREAM_INSTANCE: u64 = 2;
/// Per-replication episode seeds in the harness.
pub const STREAM_EPISODE: u64 = 3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of stream `(purpose, index)` under `root`.
pub fn derive_seed(root: u64, purpose: u64, index: u64) -> u64 {
    let mut h = splitmix64(root.wrapping_add(0xA076_1D64_78BD_642F));
    h = splitmix64(h ^ splitmix64(purpose.wrapping_add(0xE703_7ED1_A0B4_28DB)));
    splitmix64(h ^ splitmix64(index.wrapping_add(0x8EBC_6AF0_9C88_C6E3)))
}

/// Generator for stream `(purpose, index)` under `root`.
pub fn stream_rng(root: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, purpose, index))
}
