use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Name of the generator behind every stochastic transform, recorded in
/// run metadata so outputs can be reproduced elsewhere.
pub const GENERATOR_NAME: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent child seed for stream `stream` (page index, transform
    /// slot, ...). Pure in both arguments, so parallel and serial callers
    /// derive the same children.
    pub fn derive(self, stream: u64) -> RandomSeed {
        RandomSeed(splitmix64(
            self.0 ^ splitmix64(stream.wrapping_add(0x5851_f42d_4c95_7f2d)),
        ))
    }
}

impl From<u64> for RandomSeed {
    fn from(v: u64) -> Self {
        RandomSeed(v)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
