//! Seed streams.
//!
//! Every random decision in the pipeline draws from a stream keyed by the
//! master seed plus a short path of integers (purpose tag, generation,
//! individual index, ...). Streams are independent of scheduling, so
//! results do not depend on how many workers evaluate in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator type used for every seeded stream.
pub type RngStream = ChaCha8Rng;

/// Purpose tags for derived streams.
pub mod tag {
    pub const INIT_POPULATION: u64 = 1;
    pub const LHS: u64 = 2;
    pub const MATING: u64 = 3;
    pub const VARIATION: u64 = 4;
    pub const SURROGATE: u64 = 5;
    pub const GATES: u64 = 6;
    pub const LOW_NOISE: u64 = 7;
    pub const SUBSAMPLE: u64 = 8;
    pub const SUPERNET_INIT: u64 = 9;
    pub const SUPERNET_TRAIN: u64 = 10;
    pub const DATASET: u64 = 11;
    pub const ATTACK: u64 = 12;
}

const fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of integers into a 64-bit seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Opens a deterministic stream for `(master, path)`.
pub fn stream(master: u64, path: &[u64]) -> RngStream {
    RngStream::seed_from_u64(derive_seed(master, path))
}

/// Hashes raw bytes into a seed; used to key pseudo-noise by genome.
pub fn hash_bytes(master: u64, bytes: &[u8]) -> u64 {
    bytes
        .chunks(8)
        .map(|chunk| {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            u64::from_le_bytes(word)
        })
        .fold(splitmix64(master ^ bytes.len() as u64), |acc, w| {
            splitmix64(acc ^ w)
        })
}
