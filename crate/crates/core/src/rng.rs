//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit generator. Monte Carlo
//! ensembles derive one independent ChaCha stream per run from
//! `(seed, run_index)`, so results do not depend on how runs are spread
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Generator for a single sequential simulation.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for run `index` of an ensemble seeded with `seed`.
///
/// Stream 0 is reserved for [`seeded`], so ensemble runs start at stream 1.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Fresh seed for commands invoked without one, kept below 2^63 so it fits
/// an integer field of the config format.
pub fn fresh_seed() -> u64 {
    rand::random::<u64>() >> 1
}
