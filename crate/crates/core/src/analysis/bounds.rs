//! Upper bounds on the mean squared channel error of the SVD-reduced
//! spatial observation.
//!
//! The multi-path bound needs the expected ordered eigenvalues of the
//! normalized noise Gram matrix `(1/n) Z^H Z`. These are modelled as the
//! order statistics of `count` i.i.d. draws from the Marchenko–Pastur law.

use std::f64::consts::PI;

use super::quadrature::adaptive_simpson;
use crate::error::{Error, Result};

/// Absolute tolerance for every bound-related integral.
pub const QUAD_TOL: f64 = 1e-8;

/// `(sqrt(n_r) + sqrt(n_t))^2 / snr_c` in mean SSE units.
pub fn upper_bound_single_path(snr_c: f64, n_t: usize, n_r: usize) -> f64 {
    let s = (n_r as f64).sqrt() + (n_t as f64).sqrt();
    s * s / snr_c
}

/// Marchenko–Pastur law with scale `sigma_z_sq` and aspect ratio `c <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchenkoPastur {
    pub sigma_z_sq: f64,
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

impl MarchenkoPastur {
    pub fn new(sigma_z_sq: f64, c: f64) -> Result<Self> {
        if !(sigma_z_sq > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma_z_sq must be positive, got {sigma_z_sq}")));
        }
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidArgument(format!("aspect ratio must be in (0, 1], got {c}")));
        }
        let r = c.sqrt();
        Ok(Self {
            sigma_z_sq,
            c,
            a: sigma_z_sq * (1.0 - r) * (1.0 - r),
            b: sigma_z_sq * (1.0 + r) * (1.0 + r),
        })
    }

    /// Law for an `n_r x n_t` noise block: ratio `min/max`.
    pub fn for_array(sigma_z_sq: f64, n_t: usize, n_r: usize) -> Result<Self> {
        Self::new(sigma_z_sq, n_t.min(n_r) as f64 / n_t.max(n_r) as f64)
    }

    /// Antiderivative of `sqrt((x-a)(b-x)) / x` (the density without its
    /// constant factor).
    fn primitive(&self, x: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let x = x.clamp(a, b);
        let root = ((x - a) * (b - x)).max(0.0).sqrt();
        let mut v = root + 0.5 * (a + b) * ((2.0 * x - a - b) / (b - a)).clamp(-1.0, 1.0).asin();
        let gm = (a * b).sqrt();
        if gm > 0.0 {
            v -= gm * (((a + b) * x - 2.0 * a * b) / (x * (b - a))).clamp(-1.0, 1.0).asin();
        }
        v
    }

    /// CDF, normalized by the endpoint difference of the primitive so that
    /// `cdf(a) = 0` and `cdf(b) = 1` exactly.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return 1.0;
        }
        let lo = self.primitive(self.a);
        let hi = self.primitive(self.b);
        ((self.primitive(x) - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    /// Integrate `g(x) f(x) dx` over the support using `x = a + (b-a) sin^2 t`,
    /// which removes the square-root edge behaviour.
    fn integrate_against(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let (a, b) = (self.a, self.b);
        let w = b - a;
        let scale = w * w / (4.0 * PI * self.sigma_z_sq * self.c);
        let integrand = |t: f64| {
            let s = t.sin();
            let x = a + w * s * s;
            if x <= 0.0 {
                // a = 0 edge: sin^2(2t)/x -> 4/w as t -> 0
                return scale * 4.0 / w * g(x);
            }
            let s2 = (2.0 * t).sin();
            scale * s2 * s2 / x * g(x)
        };
        adaptive_simpson(integrand, 0.0, PI / 2.0, QUAD_TOL)
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.integrate_against(|_| 1.0)
    }

    pub fn mean(&self) -> Result<f64> {
        self.integrate_against(|x| x)
    }
}

pub fn mp_density(mp: &MarchenkoPastur, x: f64) -> f64 {
    if x <= mp.a || x >= mp.b {
        return 0.0;
    }
    ((x - mp.a) * (mp.b - x)).sqrt() / (2.0 * PI * mp.sigma_z_sq * mp.c * x)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum()
}

/// Expected `l`-th largest (1-based) of `count` i.i.d. draws from `mp`.
///
/// The law is a scale family in `sigma_z_sq`, so the integral is evaluated
/// at unit scale and rescaled; the absolute quadrature tolerance then acts
/// as a relative one at every noise level.
pub fn ordered_eigenvalue_mean(mp: &MarchenkoPastur, l: usize, count: usize) -> Result<f64> {
    if l == 0 || l > count {
        return Err(Error::InvalidArgument(format!("rank {l} outside 1..={count}")));
    }
    let unit = MarchenkoPastur::new(1.0, mp.c)?;
    // density of the l-th largest: count * C(count-1, l-1) f F^(count-l) (1-F)^(l-1)
    let ln_coef = (count as f64).ln() + ln_binomial(count - 1, l - 1);
    let hi_pow = (count - l) as f64;
    let lo_pow = (l - 1) as f64;
    let mean = unit.integrate_against(|x| {
        let big_f = unit.cdf(x);
        let mut ln_w = ln_coef;
        if hi_pow > 0.0 {
            if big_f <= 0.0 {
                return 0.0;
            }
            ln_w += hi_pow * big_f.ln();
        }
        if lo_pow > 0.0 {
            if big_f >= 1.0 {
                return 0.0;
            }
            ln_w += lo_pow * (1.0 - big_f).ln();
        }
        x * ln_w.exp()
    })?;
    Ok(mp.sigma_z_sq * mean)
}

/// All `count` ordered means, largest first.
pub fn ordered_eigenvalue_means(mp: &MarchenkoPastur, count: usize) -> Result<Vec<f64>> {
    (1..=count).map(|l| ordered_eigenvalue_mean(mp, l, count)).collect()
}

/// `(n_t n_r / rho) * sum_{l<=L} n lambda_l` with `n = max(n_t, n_r)` and the
/// ordered means taken over `min(n_t, n_r)` eigenvalues.
pub fn upper_bound_multi_path(paths: usize, rho: f64, n_t: usize, n_r: usize, sigma_z_sq: f64) -> Result<f64> {
    let count = n_t.min(n_r);
    if paths == 0 || paths > count {
        return Err(Error::InvalidArgument(format!("path count {paths} outside 1..={count}")));
    }
    let mp = MarchenkoPastur::for_array(sigma_z_sq, n_t, n_r)?;
    let n = n_t.max(n_r) as f64;
    let mut sum = 0.0;
    for l in 1..=paths {
        sum += n * ordered_eigenvalue_mean(&mp, l, count)?;
    }
    Ok((n_t * n_r) as f64 / rho * sum)
}
