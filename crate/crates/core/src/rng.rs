//! Deterministic, splittable random streams.
//!
//! Every stream is a ChaCha12 generator keyed by `seed` with the ChaCha stream
//! counter set to `stream_id`, so a `(seed, stream_id)` pair yields the same
//! sequence on every platform and distinct ids never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child stream `index`. Children of distinct parents or distinct indices
    /// get distinct `(seed, stream_id)` keys.
    pub fn child(&self, index: u64) -> RngStream {
        RngStream {
            seed: splitmix64(self.seed ^ splitmix64(self.stream_id)),
            stream_id: index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
