//! Named random streams derived from one master seed.
//!
//! Every stream is a ChaCha8 keystream keyed by the master seed and selected
//! by a fixed stream id, so draws in one stream never shift another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Anchors,
    Sphere,
    Noise,
    Stochastic,
    Start,
    Instance,
}

impl Stream {
    pub fn id(self) -> u64 {
        match self {
            Stream::Anchors => 1,
            Stream::Sphere => 2,
            Stream::Noise => 3,
            Stream::Stochastic => 4,
            Stream::Start => 5,
            Stream::Instance => 6,
        }
    }
}

pub fn stream(master_seed: u64, which: Stream) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(which.id());
    rng
}

/// Sub-stream for a second independent draw of the same kind (e.g. phase or node index).
pub fn substream(master_seed: u64, which: Stream, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(which.id());
    rng
}
