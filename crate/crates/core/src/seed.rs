//! Splittable deterministic seeding.
//!
//! Every random stream in the crate is derived from one top-level seed by
//! mixing in a stream label, so that adding a new consumer never perturbs the
//! streams of existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// A node in the seed tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

impl Seed {
    pub fn new(seed: u64) -> Self {
        Seed(seed)
    }

    /// Child seed for a named stream.
    pub fn child(self, label: &str) -> Seed {
        Seed(splitmix64(self.0 ^ splitmix64(fnv1a(label))))
    }

    /// Child seed for the `index`-th member of a family of streams.
    pub fn nth(self, index: u64) -> Seed {
        Seed(splitmix64(self.0.wrapping_add(splitmix64(index.wrapping_add(1)))))
    }

    pub fn rng(self) -> Rng {
        Rng::seed_from_u64(self.0)
    }
}
