use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Deterministic random source backed by a counter-based ChaCha generator.
///
/// Not meant for shared mutation: parallel code derives an independent
/// generator per task with [`SeededRng::for_trial`] and [`SeededRng::substream`].
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator for Monte Carlo trial `trial`, keyed as `seed ^ trial` so that
    /// trials are order-independent.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        Self::new(seed ^ trial)
    }

    /// Independent stream sharing this generator's key.
    pub fn substream(&self, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream);
        Self {
            seed: self.seed,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Zero-mean real Gaussian via Box–Muller (one of the pair is discarded).
    pub fn gaussian(&mut self, variance: f64) -> f64 {
        self.complex_gaussian_unchecked(2.0 * variance).re
    }

    /// Circularly-symmetric CN(0, variance): real and imaginary parts are
    /// independent with variance `variance / 2` each.
    pub fn complex_gaussian(&mut self, variance: f64) -> Result<Complex64> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "complex Gaussian variance must be positive, got {variance}"
            )));
        }
        Ok(self.complex_gaussian_unchecked(variance))
    }

    fn complex_gaussian_unchecked(&mut self, variance: f64) -> Complex64 {
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-variance * u1.ln()).sqrt();
        Complex64::from_polar(r, 2.0 * PI * u2)
    }
}

/// Draw one CN(0, variance) sample.
pub fn sample_complex_gaussian(rng: &mut SeededRng, variance: f64) -> Result<Complex64> {
    rng.complex_gaussian(variance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_variance_power() {
        let mut rng = SeededRng::new(7);
        let n = 100_000;
        let mut acc = 0.0;
        let mut mean = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let z = sample_complex_gaussian(&mut rng, 1.0).unwrap();
            acc += z.norm_sqr();
            mean += z;
        }
        let power = acc / n as f64;
        assert!((power - 1.0).abs() < 0.02, "power {power}");
        assert!((mean / n as f64).norm() < 0.02);
    }

    #[test]
    fn real_and_imaginary_split_variance() {
        let mut rng = SeededRng::new(11);
        let n = 100_000;
        let (mut re, mut im) = (0.0, 0.0);
        for _ in 0..n {
            let z = rng.complex_gaussian(2.0).unwrap();
            re += z.re * z.re;
            im += z.im * z.im;
        }
        assert!((re / n as f64 - 1.0).abs() < 0.03);
        assert!((im / n as f64 - 1.0).abs() < 0.03);
    }

    #[test]
    fn rejects_non_positive_variance() {
        let mut rng = SeededRng::new(1);
        assert!(matches!(
            sample_complex_gaussian(&mut rng, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(rng.complex_gaussian(-1.0).is_err());
        assert!(rng.complex_gaussian(f64::NAN).is_err());
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let a = SeededRng::new(42).complex_gaussian(1.0).unwrap();
        let b = SeededRng::new(42).complex_gaussian(1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn substreams_differ() {
        let base = SeededRng::for_trial(42, 3);
        let mut s0 = base.substream(0);
        let mut s1 = base.substream(1);
        assert_ne!(s0.next_u64(), s1.next_u64());
        let mut again = SeededRng::for_trial(42, 3).substream(1);
        let mut s1b = base.substream(1);
        assert_eq!(again.next_u64(), s1b.next_u64());
    }
}
