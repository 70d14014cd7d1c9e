//! Seeded random streams. Every random choice in the crate draws from a
//! ChaCha8 stream derived from `(seed, stream)` so runs replay bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Stream used by the sequential optimizers and by distributed worker 0.
pub const PRIMARY_STREAM: u64 = 0;
/// Stream used to draw shard assignments.
pub const SHARD_STREAM: u64 = u64::MAX;
/// Stream used by the simulation scheduler.
pub const SCHEDULER_STREAM: u64 = u64::MAX - 1;
/// Stream used by synthetic data generators.
pub const DATA_STREAM: u64 = u64::MAX - 2;

pub fn stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
