//! Seeded random streams.
//!
//! Each subsystem draws from its own ChaCha stream derived from the scenario
//! seed, so e.g. changing the GA budget leaves mobility traces untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Subsystem label selecting an independent stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Mobility,
    Dtn,
    Ga,
    Heuristics,
    /// Initial UAV positions and initial medoids.
    Placement,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Mobility => 1,
            Stream::Dtn => 2,
            Stream::Ga => 3,
            Stream::Heuristics => 4,
            Stream::Placement => 5,
        }
    }
}

pub fn stream(seed: u64, label: Stream) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label.id());
    rng
}
