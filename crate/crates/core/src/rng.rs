//! Seed derivation for reproducible runs.
//!
//! Every random stream in a run is a ChaCha8 generator whose seed is derived
//! from the run seed and a stream label, so the same episode sees the same
//! noise whether it runs in-process or in the pose-emulator process.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream labels.
pub mod stream {
    pub const NETWORK_INIT: u64 = 1;
    pub const LEARNER: u64 = 2;
    pub const EPISODE: u64 = 3;
    pub const ACTIONS: u64 = 4;
    pub const POSE_NOISE: u64 = 5;
    pub const ENSEMBLE_SUBSET: u64 = 6;
    pub const POSE_JITTER: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a parent seed with a label and an index into a child seed.
pub fn derive(seed: u64, label: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(label)) ^ index)
}

pub fn rng_for(seed: u64, label: u64, index: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, label, index))
}
