//! Seedable, portable random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`]. A child stream
//! is addressed by `(master_seed, domain, index)`: the 32-byte ChaCha key is
//! `master_seed` (little-endian) followed by `domain` (little-endian) and 16
//! zero bytes, and `index` selects the ChaCha stream via `set_stream`. Work
//! item `index` therefore gets the same numbers no matter which thread runs it
//! or how many threads exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Domain tags used by the harness so that unrelated draws never share a stream.
pub mod domain {
    pub const PLAIN: u64 = 0;
    pub const MC_SEEDING: u64 = 1;
    pub const REFERENCE_SAMPLE: u64 = 2;
    pub const REFERENCE_SEEDING: u64 = 3;
    /// Per-size sample draws; the size index is added to this base.
    pub const SAMPLE_BASE: u64 = 1 << 32;
    /// Per-size seeding draws; the size index is added to this base.
    pub const SEEDING_BASE: u64 = 2 << 32;
    pub const INSTANCES: u64 = 4;
}

/// Child stream `index` of `(master_seed, domain)`.
pub fn child(master_seed: u64, domain: u64, index: u64) -> Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// The plain generator for a user seed (domain 0, stream 0).
pub fn from_seed(seed: u64) -> Rng {
    child(seed, domain::PLAIN, 0)
}
