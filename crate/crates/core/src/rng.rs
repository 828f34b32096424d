//! Seed handling.
//!
//! Every random draw in the crate starts from an explicit `u64` seed. Independent
//! sub-streams (per step, per trajectory) are obtained by selecting a ChaCha stream
//! id instead of advancing a shared generator, so the value a consumer sees does not
//! depend on how many other consumers ran before it or on which thread.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for a top-level seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Child seed for `(seed, stream)`; distinct streams give unrelated seeds.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    stream_rng(seed, stream).next_u64()
}
