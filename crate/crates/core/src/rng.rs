//! Reproducible random streams.
//!
//! Every trial draws from its own ChaCha8 stream. The 256-bit key is expanded
//! with SplitMix64 from `(master_seed, stream)`, and the trial index selects
//! the 64-bit ChaCha stream id, so a trial's bits depend only on
//! `(master_seed, stream, trial_index)` and never on scheduling.
//!
//! Colors are drawn 64 sites at a time: a word of 64 independent
//! Bernoulli(p) bits is assembled from uniform words by walking the binary
//! expansion of `p` (32 fractional bits, least significant set bit first).
//! Dyadic probabilities need few words; `p = 1/2` needs exactly one.

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

/// Identifies one trial's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    /// Experiment/grid-point context; see [`stream_id`].
    pub stream: u64,
    pub trial_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream: u64, trial_index: u64) -> Self {
        Self { master_seed, stream, trial_index }
    }

    pub fn with_trial(self, trial_index: u64) -> Self {
        Self { trial_index, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.master_seed ^ splitmix64(&mut self.stream.clone());
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.trial_index);
        rng
    }
}

#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a stream id from a tag and integer parameters (FNV-1a over the
/// tag, then SplitMix64 chaining over the parameters).
pub fn stream_id(tag: &str, params: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    for &p in params {
        let mut s = h ^ p;
        h = splitmix64(&mut s);
    }
    h
}

const ONE: u64 = 1 << 32;

/// Bernoulli probability quantized to 32 fractional bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BernoulliWord {
    threshold: u64,
}

impl BernoulliWord {
    pub fn new(p: f64) -> Self {
        let t = (p.clamp(0.0, 1.0) * ONE as f64).round() as u64;
        Self { threshold: t.min(ONE) }
    }

    /// Exact quantized probability `numerator / 2^32`.
    pub fn from_fixed(numerator: u64) -> Self {
        Self { threshold: numerator.min(ONE) }
    }

    pub fn probability(&self) -> f64 {
        self.threshold as f64 / ONE as f64
    }

    /// Uniform words consumed per call.
    pub fn words_per_draw(&self) -> u32 {
        if self.threshold == 0 || self.threshold == ONE {
            0
        } else {
            32 - self.threshold.trailing_zeros()
        }
    }

    /// 64 independent bits, each set with the quantized probability.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.threshold {
            0 => 0,
            ONE => u64::MAX,
            t => {
                let mut acc = 0u64;
                for bit in t.trailing_zeros()..32 {
                    let r = rng.next_u64();
                    acc = if (t >> bit) & 1 == 1 { acc | r } else { acc & r };
                }
                acc
            }
        }
    }
}
