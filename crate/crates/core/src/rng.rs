//! Seeded random sources.
//!
//! Every consumer of randomness in a run gets its own ChaCha stream derived from the
//! run seed, so adding interventions, masks or drift events never perturbs the draws
//! that produce node values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Substream {
    Layout = 1,
    Init = 2,
    Values = 3,
    Interventions = 4,
    Mask = 5,
    Drift = 6,
    Schedule = 7,
    Analysis = 8,
    Labels = 9,
}

pub fn substream(seed: u64, which: Substream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

pub fn seeded(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}
