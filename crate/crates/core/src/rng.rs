//! Counter-based seed splitting.
//!
//! Every random stream is addressed by a master seed and a path of integer
//! tags (node, degree, block, replicate, ...). The path is hashed into a
//! ChaCha stream id, so results never depend on the order in which streams
//! are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedTree {
    master: u64,
    path: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master, path: 0 }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Child node addressed by `tag`.
    pub fn child(&self, tag: u64) -> Self {
        Self {
            master: self.master,
            path: splitmix(self.path ^ splitmix(tag.wrapping_add(0xD1B5_4A32_D192_ED03))),
        }
    }

    /// Child addressed by a sequence of tags.
    pub fn at(&self, tags: &[u64]) -> Self {
        tags.iter().fold(*self, |node, &t| node.child(t))
    }

    /// The random stream owned by this node.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.path);
        rng
    }

    /// A 64-bit value derived from this node, for handing to components
    /// that take a plain seed.
    pub fn derive_u64(&self) -> u64 {
        splitmix(self.master ^ splitmix(self.path))
    }
}
