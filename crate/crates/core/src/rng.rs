//! Seeded, splittable random streams.
//!
//! Every stochastic operation takes an explicit [`Stream`]. Streams are
//! derived from a 64-bit root seed and a label by SHA-256, so the same
//! `(root, label)` pair yields the same sequence regardless of how work is
//! split across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootSeed(pub u64);

impl RootSeed {
    pub fn stream(self, label: &str) -> Stream {
        Stream::derive(self.0, label)
    }
}

/// A named random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha12Rng,
    seed: [u8; 32],
}

impl Stream {
    pub fn derive(root: u64, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"permid/stream");
        hasher.update(root.to_le_bytes());
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        let seed: [u8; 32] = hasher.finalize().into();
        Stream {
            rng: ChaCha12Rng::from_seed(seed),
            seed,
        }
    }

    /// Child stream, independent of the parent's position.
    pub fn split(&self, label: &str) -> Stream {
        let mut hasher = Sha256::new();
        hasher.update(b"permid/split");
        hasher.update(self.seed);
        hasher.update((label.len() as u64).to_le_bytes());
        hasher.update(label.as_bytes());
        let seed: [u8; 32] = hasher.finalize().into();
        Stream {
            rng: ChaCha12Rng::from_seed(seed),
            seed,
        }
    }

    pub fn split_index(&self, index: u64) -> Stream {
        self.split(&format!("#{index}"))
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}
