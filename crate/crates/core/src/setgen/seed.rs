use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Root of every random draw: a ChaCha key (`base`) and stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub base: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(base: u64) -> Self {
        Self { base, stream: 0 }
    }

    pub fn with_stream(base: u64, stream: u64) -> Self {
        Self { base, stream }
    }

    /// Derived seed for sub-task `key` (trial index, size index, restart, ...).
    /// Same key base, distinct ChaCha stream.
    pub fn child(&self, key: u64) -> Self {
        Self {
            base: self.base,
            stream: splitmix64(self.stream ^ splitmix64(key)),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base);
        rng.set_stream(self.stream);
        rng
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.base, self.stream)
    }
}

impl FromStr for Seed {
    type Err = Error;

    /// Accepts `base` or `base:stream`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |_| Error::Domain(format!("malformed seed {s:?}"));
        match s.split_once(':') {
            Some((b, st)) => Ok(Self::with_stream(b.trim().parse().map_err(bad)?, st.trim().parse().map_err(bad)?)),
            None => Ok(Self::new(s.trim().parse().map_err(bad)?)),
        }
    }
}
