//! Counter-based random streams: one top-level seed, one independent stream
//! per trajectory index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream `index` of the generator seeded by `seed`. Streams never overlap,
/// so adding trials never perturbs earlier ones.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
