//! Counter-based random streams.
//!
//! Every output of a [`StreamRng`] is a pure function of `(key, counter)`:
//! the `i`-th draw is `mix64(key + (i + 1) * GOLDEN_GAMMA)`, i.e. the
//! SplitMix64 sequence started at `key`. Independent streams for parallel
//! replications are obtained by deriving keys with [`stream_seed`], which
//! needs no shared state and gives the same numbers on any thread count.

use rand_core::RngCore;

/// Weyl increment, `floor(2^64 / phi)` rounded to odd.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// 64-bit avalanche mixer (Stafford's "Mix13" variant of the MurmurHash3
/// finalizer). Each input bit flips each output bit with probability ~1/2.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key of the `index`-th sub-stream of `master`: `mix64(master ^ index)`.
#[inline]
pub fn stream_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ index)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamRng {
    key: u64,
    counter: u64,
}

impl StreamRng {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    /// Generator for sub-stream `index` of `master`.
    pub fn substream(master: u64, index: u64) -> Self {
        Self::new(stream_seed(master, index))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Number of 64-bit words drawn so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Repositions the stream so the next draw is word number `counter`.
    pub fn seek(&mut self, counter: u64) {
        self.counter = counter;
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for StreamRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let word = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&word[..chunk.len()]);
        }
    }
}
