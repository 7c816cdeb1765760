//! Seeded, schedule-independent noise streams.
//!
//! Every stream is a ChaCha8 keystream selected by `(seed, stream id)`, so
//! the samples assigned to a slice never depend on evaluation order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Derive the seed for trial `trial` of a run seeded with `master` (splitmix64 finalizer).
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut z = master ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal pairs by Box-Muller on 53-bit uniforms.
pub struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform on (0, 1].
    fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [0, 1).
    fn half_open_unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent N(0, 1) samples.
    pub fn next_pair(&mut self) -> (f64, f64) {
        let r = (-2.0 * self.open_unit().ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * self.half_open_unit()).sin_cos();
        (r * c, r * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<_> = (0..8).map({
            let mut g = GaussianStream::new(42, 3);
            move |_| g.next_pair()
        }).collect();
        let mut g = GaussianStream::new(42, 3);
        for p in &a {
            assert_eq!(*p, g.next_pair());
        }
        let mut other = GaussianStream::new(42, 4);
        assert_ne!(a[0], other.next_pair());
        assert_ne!(trial_seed(1, 0), trial_seed(1, 1));
    }

    #[test]
    fn moments() {
        let mut g = GaussianStream::new(7, 0);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let (a, b) = g.next_pair();
            s += a + b;
            s2 += a * a + b * b;
        }
        let m = s / (2 * n) as f64;
        let v = s2 / (2 * n) as f64 - m * m;
        assert!(m.abs() < 0.01, "mean {m}");
        assert!((v - 1.0).abs() < 0.01, "var {v}");
    }
}
