//! Seedable, splittable random streams.
//!
//! Every chain, replica or Monte Carlo unit owns one [`RngStream`]. Streams are
//! derived from `(seed, domain, index)` so that work can be scheduled in any
//! order (or in parallel) and still produce identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Well-known domains used to keep derived streams independent.
pub mod domain {
    pub const CHAIN: u64 = 0x6368_6169_6e00_0001;
    pub const REFERENCE: u64 = 0x7265_6665_7200_0002;
    pub const CONDUCTANCE: u64 = 0x636f_6e64_0000_0003;
    pub const PROPOSAL: u64 = 0x7072_6f70_0000_0004;
    pub const INSTANCE: u64 = 0x696e_7374_0000_0005;
    pub const TRIAL: u64 = 0x7472_6961_6c00_0006;
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    /// Root stream for a seed.
    pub fn new(seed: u64) -> Self {
        Self::derive(seed, 0, 0)
    }

    /// Independent stream for unit `index` of `domain` under `seed`.
    pub fn derive(seed: u64, domain: u64, index: u64) -> Self {
        let mut state = seed ^ splitmix64(&mut domain.clone());
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        Self { rng }
    }

    /// Standard normal draw.
    #[inline]
    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform draw on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.gaussian();
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }
}
