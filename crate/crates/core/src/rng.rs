//! Counter-based random streams.
//!
//! Every trial of every sweep point gets its own ChaCha stream derived from
//! the run seed, so results do not depend on the order in which trials are
//! executed or on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const TRIAL_BITS: u32 = 40;

/// Stream for trial `trial` of sweep point `point`.
pub fn trial_rng(seed: u64, point: u64, trial: u64) -> SimRng {
    debug_assert!(trial < 1 << TRIAL_BITS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((point << TRIAL_BITS) | trial);
    rng
}

/// Stream used for one-off draws keyed only by the seed.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
