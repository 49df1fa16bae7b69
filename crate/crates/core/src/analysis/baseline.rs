//! Reference estimators: least squares on the full observation and a
//! zero-padded DFT peak picker with successive cancellation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::channel::PathParams;
use crate::error::{Error, Result};
use crate::numkit::{wrap, ComplexMatrix};
use crate::observation::{to_spatial, Codebook, Observation};
use crate::tsdce::{reconstruct_path, PathEstimate};

pub const DEFAULT_N_DFT: usize = 1024;

/// Least-squares channel estimate from `Y`.
///
/// The codebook's Kronecker sensing matrix has orthogonal columns of equal
/// norm, so the normal equations collapse to a scaled back-projection
/// `(n_t n_r / (QP sqrt(rho))) W Y F^H`.
pub fn ls_estimate_explicit(obs: &Observation, cb: &Codebook) -> Result<ComplexMatrix> {
    let (n_t, n_r) = (cb.n_t(), cb.n_r());
    let qp = cb.q_count * cb.p_count;
    if qp < n_t * n_r {
        return Err(Error::RankDeficient { qp, n: n_t * n_r });
    }
    if obs.y.shape() != (cb.q_count, cb.p_count) {
        return Err(Error::InvalidArgument(format!(
            "observation is {:?} but codebook is {}x{}",
            obs.y.shape(),
            cb.q_count,
            cb.p_count
        )));
    }
    if !(obs.rho > 0.0) {
        return Err(Error::InvalidArgument(format!("transmit power must be positive, got {}", obs.rho)));
    }
    let back = cb.w.matmul(&obs.y).matmul(&cb.f.conj_transpose());
    Ok(back.scale_real((n_t * n_r) as f64 / (qp as f64 * obs.rho.sqrt())))
}

/// Peak bin `(row, col)` of the `n_dft x n_dft` zero-padded forward DFT of `x`.
fn padded_peak(x: &ComplexMatrix, n_dft: usize, planner: &mut FftPlanner<f64>) -> (usize, usize) {
    let (rows, cols) = x.shape();
    let fft = planner.plan_fft_forward(n_dft);
    let zero = Complex64::new(0.0, 0.0);

    let mut row_spectra = vec![zero; rows * n_dft];
    for m in 0..rows {
        let buf = &mut row_spectra[m * n_dft..(m + 1) * n_dft];
        buf[..cols].copy_from_slice(x.row(m));
        fft.process(buf);
    }

    let mut best = (0, 0);
    let mut best_mag = -1.0;
    let mut col = vec![zero; n_dft];
    for k2 in 0..n_dft {
        col.iter_mut().for_each(|z| *z = zero);
        for m in 0..rows {
            col[m] = row_spectra[m * n_dft + k2];
        }
        fft.process(&mut col);
        for (k1, z) in col.iter().enumerate() {
            let mag = z.norm_sqr();
            if mag > best_mag {
                best_mag = mag;
                best = (k1, k2);
            }
        }
    }
    best
}

/// Simplified DFT-domain comparator: pick the strongest peak of the padded
/// spectrum of the cropped spatial observation, estimate its gain by
/// derotated averaging, cancel it and repeat `l_desired` times.
pub fn dft_peak_baseline(
    obs: &Observation,
    n_t: usize,
    n_r: usize,
    l_desired: usize,
    n_dft: usize,
) -> Result<Vec<PathEstimate>> {
    let (q, p) = obs.y.shape();
    if !n_dft.is_power_of_two() || n_dft < q.max(p) {
        return Err(Error::InvalidArgument(format!(
            "n_dft must be a power of two >= {}, got {n_dft}",
            q.max(p)
        )));
    }
    let sp = to_spatial(obs, n_t, n_r)?;
    let sqrt_rho = obs.rho.sqrt();
    let bin_to_freq = |k: usize| wrap(2.0 * PI * k as f64 / n_dft as f64, -PI, PI);

    let mut planner = FftPlanner::new();
    let mut residual = sp.d_bar;
    let mut out = Vec::with_capacity(l_desired);
    for _ in 0..l_desired {
        let (k1, k2) = padded_peak(&residual, n_dft, &mut planner);
        let omega_aoa = bin_to_freq(k1);
        let omega_aod = bin_to_freq(k2);
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..n_r {
            for n in 0..n_t {
                acc += residual[(m, n)] * Complex64::from_polar(1.0, -(omega_aoa * m as f64 + omega_aod * n as f64));
            }
        }
        let mean = acc / (n_t * n_r) as f64;
        let gain = mean * ((n_t * n_r) as f64).sqrt() / sqrt_rho;
        let est = PathParams::from_frequencies(gain, omega_aod, omega_aoa)?;
        residual = &residual - &reconstruct_path(&est, n_t, n_r).scale_real(sqrt_rho);
        out.push(est);
    }
    Ok(out)
}
