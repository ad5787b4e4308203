//! Splittable seed streams.
//!
//! Every replicate, simulation and region draws from its own stream derived
//! from a root seed by a counter path, so results never depend on the order
//! or thread in which work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    state: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(root: u64) -> Self {
        Self {
            state: splitmix(root),
        }
    }

    /// Child stream `index` of this stream.
    pub fn child(&self, index: u64) -> Self {
        Self {
            state: splitmix(self.state ^ splitmix(index.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }

    /// Child stream keyed by a label and an index, e.g. `("replicate", 17)`.
    pub fn named(&self, label: &str, index: u64) -> Self {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        for b in label.bytes() {
            h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        }
        self.child(h).child(index)
    }

    pub fn rng(&self) -> Rng {
        Rng::seed_from_u64(self.state)
    }
}
