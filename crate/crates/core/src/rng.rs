//! Seeded, platform-independent random stream.
//!
//! The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), keyed by
//! expanding the 64-bit seed through `SeedableRng::seed_from_u64`. ChaCha is
//! counter based, so the draw sequence is a pure function of `(seed, stream)`
//! on every platform. Floats are built from the top 53 bits of a `u64` draw.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent stream with the same key and a different ChaCha stream id.
    pub fn substream(&self, id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(id.wrapping_add(1));
        Self {
            seed: self.seed,
            inner,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    pub fn uniform_open_low(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * INV_2_53
    }

    pub fn uniform_in(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.uniform()
    }

    /// Standard exponential variate by inversion.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open_low().ln()
    }

    /// Uniform integer in `0..n`, unbiased (rejection on the top of the range).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seeds_equal_draws() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..10_000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn sequence_is_pinned() {
        // Frozen from the first run; guards against generator or seeding changes.
        let mut r = RngStream::new(0);
        let first: Vec<u64> = (0..3).map(|_| r.next_u64()).collect();
        assert_eq!(first, [0xb585f767a79a3b6c, 0x7746a55fbad8c037, 0xb2fb0d3281e2a6e6]);
        assert_ne!(RngStream::new(1).next_u64(), first[0]);
    }

    #[test]
    fn substreams_differ() {
        let base = RngStream::new(7);
        let mut s1 = base.substream(1);
        let mut s2 = base.substream(2);
        assert_ne!(s1.next_u64(), s2.next_u64());
        let mut s1b = base.substream(1);
        assert_eq!(base.substream(1).next_u64(), s1b.next_u64());
    }

    #[test]
    fn ranges() {
        let mut r = RngStream::new(3);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
            let v = r.uniform_open_low();
            assert!(v > 0.0 && v <= 1.0);
            assert!(r.below(5) < 5);
            assert!(r.exponential() >= 0.0);
        }
    }
}
