//! Counter-based splittable random number generator.
//!
//! Every stochastic operation in this crate takes an explicit 64-bit seed and
//! draws from a [`CounterRng`]: a keyed SplitMix64-style permutation applied
//! to an incrementing counter. Because the output is a pure function of
//! `(key, counter)`, streams can be split by deriving fresh keys, and a Monte
//! Carlo loop partitioned across workers by substream index produces the same
//! result for any worker count.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const KEY_DOMAIN: u64 = 0xD6E8_FEB8_6659_FD93;
const STREAM_DOMAIN: u64 = 0xA076_1D64_78BD_642F;

/// SplitMix64 finalizer: a well-mixed 64-bit permutation.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic, seedable, splittable counter-based generator.
///
/// `next_u64` returns `mix64(key + counter·φ)` and bumps the counter, i.e.
/// the SplitMix64 stream keyed by `key`. [`CounterRng::substream`] derives an
/// independent child key from `(key, stream)` without consuming any state, so
/// substream `i` of a given root seed is the same regardless of how much the
/// parent has been used.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            key: mix64(seed ^ KEY_DOMAIN),
            counter: 0,
        }
    }

    /// Child generator for substream `stream`. Independent of the parent's
    /// counter position.
    pub fn substream(&self, stream: u64) -> Self {
        CounterRng {
            key: mix64(self.key ^ mix64(stream.wrapping_add(STREAM_DOMAIN))),
            counter: 0,
        }
    }

    /// Uniform draw in `[0,1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64) / DEN
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
