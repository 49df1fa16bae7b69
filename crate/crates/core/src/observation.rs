//! DFT-structured beam codebook, the angular-domain training observation and
//! its transform into the spatial domain.
//!
//! With the codebook cosines chosen as `wrap(2p/P)` (Tx) and `wrap(-2q/Q)`
//! (Rx), the noiseless observation `W^H H F` is exactly the forward 2D DFT of
//! `H / sqrt(n_t n_r)` zero-padded to `Q x P`. The inverse DFT therefore
//! places a scaled copy of the channel in the top-left `n_r x n_t` corner and
//! spreads the noise evenly over all `QP` bins.

use num_complex::Complex64;

use crate::channel::{steering_from_cosine, ChannelRealization};
use crate::error::{Error, Result};
use crate::numkit::{dft, ComplexMatrix, SeededRng};

pub use crate::numkit::wrap;

#[derive(Debug, Clone)]
pub struct Codebook {
    pub p_count: usize,
    pub q_count: usize,
    /// `cos` of the quantized AoDs.
    pub tx_cosines: Vec<f64>,
    /// `cos` of the quantized AoAs.
    pub rx_cosines: Vec<f64>,
    /// `n_t x P`, column `p` is the Tx steering vector for `tx_cosines[p]`.
    pub f: ComplexMatrix,
    /// `n_r x Q`, column `q` is the Rx steering vector for `rx_cosines[q]`.
    pub w: ComplexMatrix,
}

impl Codebook {
    pub fn n_t(&self) -> usize {
        self.f.rows()
    }

    pub fn n_r(&self) -> usize {
        self.w.rows()
    }
}

/// Noisy `Q x P` training observation `Y = sqrt(rho) W^H H F + N`.
#[derive(Debug, Clone)]
pub struct Observation {
    pub y: ComplexMatrix,
    pub rho: f64,
    pub sigma_n_sq: f64,
}

impl Observation {
    pub fn snr(&self) -> f64 {
        self.rho / self.sigma_n_sq
    }
}

#[derive(Debug, Clone)]
pub struct SpatialObservation {
    /// Inverse 2D DFT of the observation, `Q x P`.
    pub d: ComplexMatrix,
    /// Top-left `n_r x n_t` block of `d`.
    pub d_bar: ComplexMatrix,
    pub mask_rows: usize,
    pub mask_cols: usize,
    /// Mean power outside the mask; absent when the mask covers everything.
    pub sigma_z_sq_hat: Option<f64>,
}

pub fn build_codebook(p_count: usize, q_count: usize, n_t: usize, n_r: usize) -> Result<Codebook> {
    if n_t == 0 || n_r == 0 {
        return Err(Error::InvalidConfiguration("antenna counts must be positive".into()));
    }
    if p_count < n_t || q_count < n_r {
        return Err(Error::InvalidConfiguration(format!(
            "codebook {q_count}x{p_count} smaller than the {n_r}x{n_t} array"
        )));
    }
    let tx_cosines: Vec<f64> = (0..p_count)
        .map(|p| wrap(2.0 * p as f64 / p_count as f64, -1.0, 1.0))
        .collect();
    let rx_cosines: Vec<f64> = (0..q_count)
        .map(|q| wrap(-2.0 * q as f64 / q_count as f64, -1.0, 1.0))
        .collect();
    let mut f = ComplexMatrix::zeros(n_t, p_count);
    for (p, &c) in tx_cosines.iter().enumerate() {
        for (k, z) in steering_from_cosine(c, n_t).into_iter().enumerate() {
            f[(k, p)] = z;
        }
    }
    let mut w = ComplexMatrix::zeros(n_r, q_count);
    for (q, &c) in rx_cosines.iter().enumerate() {
        for (k, z) in steering_from_cosine(c, n_r).into_iter().enumerate() {
            w[(k, q)] = z;
        }
    }
    Ok(Codebook {
        p_count,
        q_count,
        tx_cosines,
        rx_cosines,
        f,
        w,
    })
}

/// `Y = sqrt(rho) W^H H F + N` with `N` i.i.d. CN(0, sigma_n_sq). The pilot
/// symbol is 1. `sigma_n_sq = 0` gives the noiseless observation and draws
/// nothing from `rng`.
pub fn synthesize_observation(
    ch: &ChannelRealization,
    cb: &Codebook,
    rho: f64,
    sigma_n_sq: f64,
    rng: &mut SeededRng,
) -> Result<Observation> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("transmit power must be positive, got {rho}")));
    }
    if !(sigma_n_sq >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise variance must be non-negative, got {sigma_n_sq}")));
    }
    if ch.h.shape() != (cb.n_r(), cb.n_t()) {
        return Err(Error::InvalidArgument(format!(
            "channel is {:?} but codebook expects {}x{}",
            ch.h.shape(),
            cb.n_r(),
            cb.n_t()
        )));
    }
    let g = cb.w.conj_transpose().matmul(&ch.h).matmul(&cb.f);
    let mut y = g.scale_real(rho.sqrt());
    if sigma_n_sq > 0.0 {
        for z in y.as_mut_slice() {
            *z += rng.complex_gaussian(sigma_n_sq)?;
        }
    }
    Ok(Observation { y, rho, sigma_n_sq })
}

pub fn to_spatial(obs: &Observation, n_t: usize, n_r: usize) -> Result<SpatialObservation> {
    let (q, p) = obs.y.shape();
    if q < n_r || p < n_t {
        return Err(Error::InvalidArgument(format!(
            "observation {q}x{p} smaller than the {n_r}x{n_t} array"
        )));
    }
    let d = dft::inverse(&obs.y);
    let d_bar = d.crop(n_r, n_t);
    let outside = q * p - n_r * n_t;
    let sigma_z_sq_hat = if outside > 0 {
        let mut acc = 0.0;
        for m in 0..q {
            for n in 0..p {
                if m >= n_r || n >= n_t {
                    acc += d[(m, n)].norm_sqr();
                }
            }
        }
        Some(acc / outside as f64)
    } else {
        None
    };
    Ok(SpatialObservation {
        d,
        d_bar,
        mask_rows: n_r,
        mask_cols: n_t,
        sigma_z_sq_hat,
    })
}

/// Channel estimate `sqrt(n_t n_r / rho) * d_bar`.
pub fn spatial_ls_estimate(sp: &SpatialObservation, rho: f64) -> Result<ComplexMatrix> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("transmit power must be positive, got {rho}")));
    }
    let scale = ((sp.mask_rows * sp.mask_cols) as f64 / rho).sqrt();
    Ok(sp.d_bar.scale_real(scale))
}

/// Effective SNR in the cropped spatial observation: `snr * QP / (n_t n_r)`.
pub fn snr_in_spatial_domain(snr: f64, p_count: usize, q_count: usize, n_t: usize, n_r: usize) -> f64 {
    snr * (q_count * p_count) as f64 / (n_t * n_r) as f64
}

/// Noiseless closed form of one path's contribution to `Y` (product of two
/// Dirichlet kernels), evaluated at frequency offsets from the codebook bins.
pub fn dirichlet_component(gain: Complex64, omega_aoa: f64, omega_aod: f64, cb: &Codebook) -> ComplexMatrix {
    let (n_t, n_r) = (cb.n_t(), cb.n_r());
    let a = gain / ((n_t * n_r) as f64).sqrt();
    let kernel = |delta: f64, n: usize| -> Complex64 {
        // sum_{k<n} exp(-j delta k)
        let den = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -delta);
        if den.norm() < 1e-9 {
            (0..n).map(|k| Complex64::from_polar(1.0, -delta * k as f64)).sum()
        } else {
            (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -delta * n as f64)) / den
        }
    };
    ComplexMatrix::from_fn(cb.q_count, cb.p_count, |q, p| {
        let omega_q = -std::f64::consts::PI * cb.rx_cosines[q];
        let omega_p = std::f64::consts::PI * cb.tx_cosines[p];
        a * kernel(omega_q - omega_aoa, n_r) * kernel(omega_p - omega_aod, n_t)
    })
}
