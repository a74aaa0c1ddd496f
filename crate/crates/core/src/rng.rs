//! Label-addressed random streams.
//!
//! Every random draw in the crate comes from a stream keyed by the root seed
//! plus a short list of labels (sample index, coordinate, purpose). Streams
//! never share state, so the output of a parallel run does not depend on the
//! scheduling order or on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Root seed plus the sample index of the path being generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub root: u64,
    #[serde(default)]
    pub path: u64,
}

/// Stream purposes; part of the stream key.
pub(crate) mod purpose {
    pub const GAUSSIAN: u64 = 1;
    pub const STABLE: u64 = 2;
    pub const SUBORDINATOR: u64 = 3;
    pub const DRIFT: u64 = 4;
    pub const DIRECTIONS: u64 = 5;
    pub const SUM_TERM: u64 = 6;
}

impl Seed {
    pub fn new(root: u64) -> Self {
        Seed { root, path: 0 }
    }

    /// Same root, different sample index.
    pub fn with_path(self, path: u64) -> Self {
        Seed { path, ..self }
    }

    /// Independent generator for `(root, path, labels...)`.
    pub fn stream(&self, labels: &[u64]) -> ChaCha8Rng {
        let mut state = splitmix(self.root ^ 0x6a09_e667_f3bc_c908);
        state = splitmix(state ^ self.path);
        for &l in labels {
            state = splitmix(state ^ l.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        }
        let mut key = [0u8; 32];
        let mut s = state;
        for chunk in key.chunks_mut(8) {
            s = splitmix(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = Seed::new(7);
        let a: Vec<u64> = (0..4).map(|_| s.stream(&[1, 2]).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let x: u64 = s.stream(&[1, 2]).random();
        let y: u64 = s.stream(&[2, 1]).random();
        let z: u64 = s.with_path(1).stream(&[1, 2]).random();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }
}
