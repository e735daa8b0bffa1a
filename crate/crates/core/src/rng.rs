//! Seeded random streams.
//!
//! Every subsystem draws from its own ChaCha8 stream derived from the run
//! seed, so adding draws in one place never shifts another, and parallel work
//! indexed by a sub-stream is independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Observations = 1,
    ErrorsA = 2,
    ErrorsB = 3,
    Bootstrap = 4,
    HedgingLocation = 5,
    HedgingObservation = 6,
    HedgingNoiseA = 7,
}

/// The generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    substream_rng(seed, stream, 0)
}

/// An indexed sub-stream, e.g. one per bootstrap resample.
pub fn substream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    debug_assert!(index < 1 << 48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 48) | index);
    rng
}
