//! Per-entity random streams derived from one master seed.
//!
//! Each entity draws from its own ChaCha8 stream, keyed by an FNV-1a hash of
//! its id, so adding or reordering entities never perturbs another's draws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn entity_stream(master_seed: u64, entity_id: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(fnv1a(entity_id.as_bytes()));
    rng
}

/// A single 64-bit seed for APIs that take one (e.g. noise generation).
pub fn entity_seed(master_seed: u64, entity_id: &str) -> u64 {
    entity_stream(master_seed, entity_id).next_u64()
}
