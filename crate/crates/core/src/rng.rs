//! Seeded random streams.
//!
//! Every consumer of randomness in a run gets its own ChaCha stream derived
//! from the run seed, so adding draws in one component never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

/// Named substreams of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Seed population and ground-truth weights shared by all policies of a seed.
    Init = 1,
    Evolution = 2,
    Particles = 3,
    Controller = 4,
    Resampling = 5,
    DecisionMaker = 6,
    TruthWeights = 7,
}

pub fn stream(seed: u64, which: Stream) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

/// SplitMix64 finalizer, used to fold several integers into one seed.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
