use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Well-known stream ids so that independent consumers of one seed never
/// share a sequence.
pub mod streams {
    pub const GAME: u64 = 0;
    pub const SAMPLING: u64 = 1;
    pub const SNAPSHOT: u64 = 2;
    pub const INIT: u64 = 3;
    pub const OUTPUT: u64 = 4;
    pub const PROBE: u64 = 5;
}

/// Seeded, stream-separated random source (ChaCha8 keyed by `seed`, with the
/// stream id selecting an independent keystream). Normal deviates use the
/// Box–Muller transform and consume uniforms in pairs.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Unbiased integer in `0..n` (rejection sampling). `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be non-empty");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // u1 in (0, 1] keeps ln finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn gaussian(&mut self, mean: f64, std: f64) -> Result<f64> {
        if !(std >= 0.0) || !std.is_finite() {
            return Err(Error::invalid(
                "std",
                format!("must be finite and >= 0, got {std}"),
            ));
        }
        let z = self.standard_normal();
        Ok(if std == 0.0 { mean } else { mean + std * z })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_std_returns_mean() {
        let mut r = RngStream::new(1, 0);
        for _ in 0..10 {
            assert_eq!(r.gaussian(3.25, 0.0).unwrap(), 3.25);
        }
    }

    #[test]
    fn negative_std_rejected() {
        assert!(RngStream::new(1, 0).gaussian(0.0, -1.0).is_err());
    }

    #[test]
    fn replay_is_bit_identical() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..100 {
            assert_eq!(
                a.gaussian(0.0, 1.0).unwrap().to_bits(),
                b.gaussian(0.0, 1.0).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RngStream::new(42, 0);
        let mut b = RngStream::new(42, 1);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn normal_moments() {
        let mut r = RngStream::new(2024, 3);
        let m = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..m {
            let z = r.gaussian(0.0, 1.0).unwrap();
            s += z;
            s2 += z * z;
        }
        let mean = s / m as f64;
        let sd = (s2 / m as f64 - mean * mean).sqrt();
        assert!(mean.abs() <= 0.01, "mean {mean}");
        assert!((0.99..=1.01).contains(&sd), "sd {sd}");
    }

    #[test]
    fn index_is_in_range_and_roughly_uniform() {
        let mut r = RngStream::new(5, 0);
        let mut counts = [0usize; 7];
        for _ in 0..70_000 {
            counts[r.index(7)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 70_000.0 - 1.0 / 7.0).abs() < 0.01);
        }
    }
}
