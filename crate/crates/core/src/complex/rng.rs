use num_complex::Complex;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::vector::ComplexVector;
use crate::Real;

/// Deterministic generator keyed by `(seed, stream)`.
///
/// Each key selects an independent ChaCha stream, so trials and sub-tasks can
/// draw in any execution order and still reproduce bit-for-bit.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Fresh generator on a stream derived from this one's key and `tag`.
    /// Does not consume draws from `self`.
    pub fn derive(&self, tag: u64) -> SeededRng {
        SeededRng::new(self.seed, splitmix64(self.stream ^ splitmix64(tag)))
    }
}

/// Stream id for an ordered tuple of indices.
pub(crate) fn stream_key(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243f_6a88_85a3_08d3, |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

/// One CN(0, 1) draw: real and imaginary parts independent N(0, 1/2).
pub(crate) fn complex_normal<T: Real>(rng: &mut SeededRng) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(
        T::of(re * std::f64::consts::FRAC_1_SQRT_2),
        T::of(im * std::f64::consts::FRAC_1_SQRT_2),
    )
}

/// `len` i.i.d. circularly-symmetric complex Gaussian entries with `E|w|² = 1`.
pub fn sample_complex_gaussian<T: Real>(rng: &mut SeededRng, len: usize) -> ComplexVector<T> {
    assert!(len > 0, "sample length must be positive");
    ComplexVector::from_vec_unchecked((0..len).map(|_| complex_normal(rng)).collect())
}
