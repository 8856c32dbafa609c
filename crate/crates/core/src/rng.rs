//! Reproducible randomness: every stochastic operation takes an explicit
//! stream handle, so a whole run replays bit-identically from one master seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::real::Real;

/// A named, splittable random stream.
///
/// Two handles with equal `(seed, stream)` produce identical draws.
/// `substream` derives statistically independent child streams; deriving with
/// the same tag twice yields the same child.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    stream: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self, tag: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(tag.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        }
    }

    /// Instantiates the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Uniform draw in `[0, 1)` as the requested scalar type.
pub fn uniform<R: Real>(rng: &mut ChaCha8Rng) -> R {
    R::of(rng.random::<f64>())
}
