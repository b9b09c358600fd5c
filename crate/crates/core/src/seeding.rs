//! Indexed, splittable seeding.
//!
//! Every random object is drawn from a ChaCha8 stream addressed by a
//! `(seed, stream)` pair, so results never depend on draw order across
//! threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers for the independent substreams of one experiment seed.
pub mod stream {
    pub const SELECTOR: u64 = 1;
    pub const GENERATOR: u64 = 2;
    pub const EXTRA_COLUMN: u64 = 3;
    pub const THRESHOLD: u64 = 4;
    pub const UNIFORM_DITHER: u64 = 5;
    pub const SIGNAL: u64 = 6;
    pub const NOISE: u64 = 7;
    pub const SAMPLES: u64 = 8;
    pub const RESAMPLE: u64 = 9;
}

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a master seed together with a path of indices into a child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix(master), |acc, &p| splitmix(acc ^ splitmix(p)))
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
