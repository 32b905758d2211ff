use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named sub-streams of one seed.
///
/// Each stream is an independent ChaCha8 stream, so e.g. drawing more
/// patches never shifts the noise realisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    Kernel = 1,
    Patches = 2,
    Init = 3,
    Noise = 4,
    /// Free-form streams for callers that need more (per-image, per-tensor).
    Custom = 16,
}

/// Seeded, splittable random generator.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::at(seed, 0)
    }

    fn at(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A fresh generator for `stream`, independent of this one's position.
    pub fn substream(&self, stream: Stream) -> Rng {
        Self::at(self.seed, stream as u64)
    }

    /// A fresh generator keyed by an arbitrary label (e.g. a tensor name or
    /// an image index) under a named stream.
    pub fn keyed(&self, stream: Stream, key: &str) -> Rng {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in key.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        Self::at(self.seed ^ h.rotate_left(17), stream as u64)
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}
