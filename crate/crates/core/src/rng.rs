//! Seeded, splittable random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type BanditRng = ChaCha8Rng;

/// Stream `index` of the generator keyed by `seed`. Distinct indices give
/// independent streams, so replication `i` of a run owns `stream(seed, i)`.
pub fn stream(seed: u64, index: u64) -> BanditRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
