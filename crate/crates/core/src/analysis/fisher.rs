//! Cramér–Rao bound for the path parameters of a noisy channel matrix and
//! the Monte Carlo NMSE it implies.
//!
//! The observation model is `vec(H) + e` with `e` white complex Gaussian of
//! per-entry variance `noise_var`. Each path contributes four real unknowns
//! `(|alpha|, angle(alpha), w_phi, w_psi)`.

use num_complex::Complex64;

use super::bounds::{ordered_eigenvalue_means, MarchenkoPastur};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::numkit::{symmetric_pinv, ComplexMatrix, SeededRng};

/// Eigenvalues below this fraction of the largest are dropped when inverting.
pub const PINV_FLOOR: f64 = 1e-12;

pub const PARAMS_PER_PATH: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct FisherModel {
    /// Per path: `|alpha|, angle(alpha), w_phi (AoD), w_psi (AoA)`.
    pub params: Vec<f64>,
    pub noise_var: f64,
    pub n_t: usize,
    pub n_r: usize,
}

impl FisherModel {
    pub fn from_channel(ch: &ChannelRealization, noise_var: f64) -> Self {
        let params = ch
            .paths
            .iter()
            .flat_map(|p| [p.gain_magnitude, p.gain_phase, p.omega_aod, p.omega_aoa])
            .collect();
        Self {
            params,
            noise_var,
            n_t: ch.n_t,
            n_r: ch.n_r,
        }
    }

    pub fn path_count(&self) -> usize {
        self.params.len() / PARAMS_PER_PATH
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }
}

/// Row-major square real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl RealMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

/// `h[m,n] = sum_l |alpha_l| exp(j(angle_l + w_psi_l m + w_phi_l n))`.
pub fn channel_from_params(params: &[f64], n_t: usize, n_r: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n_r, n_t);
    for p in params.chunks_exact(PARAMS_PER_PATH) {
        let (mag, phase, w_phi, w_psi) = (p[0], p[1], p[2], p[3]);
        for m in 0..n_r {
            for n in 0..n_t {
                h[(m, n)] += Complex64::from_polar(mag, phase + w_psi * m as f64 + w_phi * n as f64);
            }
        }
    }
    h
}

/// Analytic Jacobian of `vec(H)` (row-major) with respect to the parameters,
/// one column per parameter.
pub fn fisher_jacobian(model: &FisherModel) -> Vec<Vec<Complex64>> {
    let (n_t, n_r) = (model.n_t, model.n_r);
    let mut cols = Vec::with_capacity(model.dim());
    for p in model.params.chunks_exact(PARAMS_PER_PATH) {
        let (mag, phase, w_phi, w_psi) = (p[0], p[1], p[2], p[3]);
        let mut d_mag = Vec::with_capacity(n_t * n_r);
        let mut d_phase = Vec::with_capacity(n_t * n_r);
        let mut d_phi = Vec::with_capacity(n_t * n_r);
        let mut d_psi = Vec::with_capacity(n_t * n_r);
        for m in 0..n_r {
            for n in 0..n_t {
                let e = Complex64::from_polar(1.0, phase + w_psi * m as f64 + w_phi * n as f64);
                let j_term = Complex64::i() * mag * e;
                d_mag.push(e);
                d_phase.push(j_term);
                d_phi.push(j_term * n as f64);
                d_psi.push(j_term * m as f64);
            }
        }
        cols.extend([d_mag, d_phase, d_phi, d_psi]);
    }
    cols
}

/// `F_ij = (2 / noise_var) Re(J_i^H J_j)`.
pub fn fisher_matrix(model: &FisherModel) -> Result<RealMatrix> {
    if !(model.noise_var > 0.0) {
        return Err(Error::InvalidArgument(format!("noise variance must be positive, got {}", model.noise_var)));
    }
    if !model.params.len().is_multiple_of(PARAMS_PER_PATH) {
        return Err(Error::InvalidArgument(format!("parameter vector length {} is not a multiple of 4", model.params.len())));
    }
    let jac = fisher_jacobian(model);
    let n = jac.len();
    let k = 2.0 / model.noise_var;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let dot: Complex64 = jac[i].iter().zip(&jac[j]).map(|(a, b)| a.conj() * b).sum();
            let v = k * dot.re;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(RealMatrix { n, data })
}

/// Diagonal of the (pseudo-)inverse Fisher matrix and whether the
/// eigenvalue floor was needed.
pub fn crlb_variances(fisher: &RealMatrix) -> (Vec<f64>, bool) {
    let (inv, floored) = symmetric_pinv(&fisher.data, fisher.n, PINV_FLOOR);
    ((0..fisher.n).map(|i| inv[i * fisher.n + i].max(0.0)).collect(), floored)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrlbSample {
    /// `||H_hat - H||_F^2 / ||H||_F^2` for the perturbed reconstruction.
    pub nmse_ratio: f64,
    /// True if the Fisher matrix had to be regularized.
    pub regularized: bool,
}

/// Precomputed residual noise levels for an array and noise level, so many
/// realizations can share the eigenvalue integrals.
///
/// The residual after rank-`L` reduction is treated as white Gaussian with
/// per-entry variance `(1/rho) sum_{l<=L} n lambda_l`.
#[derive(Debug, Clone)]
pub struct CrlbBound {
    rho: f64,
    /// Cumulative `n * lambda_l` sums, index `L - 1`.
    cumulative: Vec<f64>,
}

impl CrlbBound {
    pub fn new(n_t: usize, n_r: usize, rho: f64, sigma_z_sq: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument(format!("transmit power must be positive, got {rho}")));
        }
        if sigma_z_sq == 0.0 {
            return Ok(Self {
                rho,
                cumulative: vec![0.0; n_t.min(n_r)],
            });
        }
        let mp = MarchenkoPastur::for_array(sigma_z_sq, n_t, n_r)?;
        let n = n_t.max(n_r) as f64;
        let mut acc = 0.0;
        let cumulative = ordered_eigenvalue_means(&mp, n_t.min(n_r))?
            .into_iter()
            .map(|lam| {
                acc += n * lam;
                acc
            })
            .collect();
        Ok(Self { rho, cumulative })
    }

    pub fn noise_var(&self, paths: usize) -> Result<f64> {
        if paths == 0 || paths > self.cumulative.len() {
            return Err(Error::InvalidArgument(format!(
                "path count {paths} outside 1..={}",
                self.cumulative.len()
            )));
        }
        Ok(self.cumulative[paths - 1] / self.rho)
    }

    /// One Monte Carlo draw of the CRLB-perturbed reconstruction error.
    pub fn sample(&self, ch: &ChannelRealization, rng: &mut SeededRng) -> Result<CrlbSample> {
        let noise_var = self.noise_var(ch.paths.len())?;
        if noise_var == 0.0 {
            return Ok(CrlbSample {
                nmse_ratio: 0.0,
                regularized: false,
            });
        }
        let model = FisherModel::from_channel(ch, noise_var);
        let fisher = fisher_matrix(&model)?;
        let (vars, regularized) = crlb_variances(&fisher);
        if regularized {
            log::warn!("Fisher matrix near-singular; CRLB uses a floored pseudo-inverse");
        }
        let perturbed: Vec<f64> = model
            .params
            .iter()
            .zip(&vars)
            .map(|(&p, &v)| p + rng.gaussian(v))
            .collect();
        let h_hat = channel_from_params(&perturbed, ch.n_t, ch.n_r);
        let denom = ch.h.frobenius_norm_sq();
        if denom == 0.0 {
            return Err(Error::InvalidArgument("channel has zero norm".into()));
        }
        Ok(CrlbSample {
            nmse_ratio: (&h_hat - &ch.h).frobenius_norm_sq() / denom,
            regularized,
        })
    }
}

/// Single-realization CRLB reconstruction NMSE ratio. `sigma_z_sq` is the
/// per-bin spatial noise variance `sigma_n^2 / (QP)`.
pub fn crlb_nmse_bound(ch: &ChannelRealization, rho: f64, sigma_z_sq: f64, rng: &mut SeededRng) -> Result<f64> {
    Ok(CrlbBound::new(ch.n_t, ch.n_r, rho, sigma_z_sq)?.sample(ch, rng)?.nmse_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_channel, PathParams};

    fn single(mag: f64) -> ChannelRealization {
        build_channel(vec![PathParams::from_angles(Complex64::from_polar(mag, 0.3), 1.0, 2.0)], 8, 8).unwrap()
    }

    #[test]
    fn params_roundtrip_channel() {
        let ch = build_channel(
            vec![
                PathParams::from_angles(Complex64::new(0.5, 0.2), 0.7, 1.9),
                PathParams::from_angles(Complex64::new(-0.1, 0.3), 2.2, 1.1),
            ],
            6,
            5,
        )
        .unwrap();
        let model = FisherModel::from_channel(&ch, 1.0);
        assert!(channel_from_params(&model.params, 6, 5).max_abs_diff(&ch.h) < 1e-12);
    }

    #[test]
    fn zero_amplitude_kills_phase_and_frequency_information() {
        let model = FisherModel::from_channel(&single(0.0), 0.1);
        let f = fisher_matrix(&model).unwrap();
        for i in 1..4 {
            for j in 0..4 {
                assert_eq!(f.get(i, j), 0.0);
                assert_eq!(f.get(j, i), 0.0);
            }
        }
        assert!(f.get(0, 0) > 0.0);
    }

    #[test]
    fn amplitude_information_is_n_over_var() {
        let model = FisherModel::from_channel(&single(0.7), 0.5);
        let f = fisher_matrix(&model).unwrap();
        assert!((f.get(0, 0) - 2.0 * 64.0 / 0.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_noise() {
        let model = FisherModel::from_channel(&single(1.0), 0.0);
        assert!(fisher_matrix(&model).is_err());
    }

    #[test]
    fn zero_noise_gives_exact_reconstruction() {
        let r = crlb_nmse_bound(&single(1.0), 1.0, 0.0, &mut SeededRng::new(3)).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn duplicated_path_is_regularized() {
        let p = PathParams::from_angles(Complex64::new(0.5, 0.0), 1.0, 1.0);
        let ch = build_channel(vec![p, p], 8, 8).unwrap();
        let bound = CrlbBound::new(8, 8, 1.0, 0.01).unwrap();
        let s = bound.sample(&ch, &mut SeededRng::new(1)).unwrap();
        assert!(s.regularized);
        assert!(s.nmse_ratio.is_finite());
    }
}
