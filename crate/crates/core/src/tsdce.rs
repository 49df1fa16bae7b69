//! Channel estimation in the transformed spatial domain.
//!
//! Paths are extracted one at a time from the cropped spatial observation
//! `d_bar`. For each path the observation (minus every other current path
//! estimate) is optionally reduced to its best rank-one approximation, its
//! unbiased 2D autocorrelation is taken, and the two spatial frequencies are
//! read off as weighted least-squares slopes of the unwrapped phase along the
//! first column (AoA) and first row (AoD) of the autocorrelation. The gain
//! magnitude comes from a lag-weighted average of autocorrelation magnitudes
//! and the gain phase from the derotated mean of the observation.
//!
//! The whole sweep over `l_desired` paths is repeated `rounds` times; from the
//! second round on every path is re-estimated with all the others cancelled.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::PathParams;
use crate::error::{Error, Result};
use crate::numkit::{
    acf2d_unbiased, dominant_singular_triplet, lag_count, wrap, ComplexMatrix, DEFAULT_SVD_MAX_ITER,
    DEFAULT_SVD_TOL,
};
use crate::observation::{to_spatial, Observation};

/// Estimated path; same layout as the true path parameters, with angles
/// derived from the wrapped frequencies.
pub type PathEstimate = PathParams;

#[derive(Debug, Clone, PartialEq)]
pub struct TsdceConfig {
    pub l_desired: usize,
    pub rounds: usize,
    pub rho: f64,
    pub n_t: usize,
    pub n_r: usize,
    pub svd_tol: f64,
    pub svd_max_iter: usize,
}

impl TsdceConfig {
    pub fn new(l_desired: usize, rounds: usize, rho: f64, n_t: usize, n_r: usize) -> Result<Self> {
        let cfg = Self {
            l_desired,
            rounds,
            rho,
            n_t,
            n_r,
            svd_tol: DEFAULT_SVD_TOL,
            svd_max_iter: DEFAULT_SVD_MAX_ITER,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_desired == 0 || self.rounds == 0 {
            return Err(Error::InvalidConfiguration("l_desired and rounds must be at least 1".into()));
        }
        if self.n_t < 2 || self.n_r < 2 {
            return Err(Error::InvalidConfiguration("arrays need at least 2 antennas".into()));
        }
        if self.l_desired > self.n_t.min(self.n_r) {
            return Err(Error::InvalidConfiguration(format!(
                "l_desired = {} exceeds min(n_t, n_r) = {}",
                self.l_desired,
                self.n_t.min(self.n_r)
            )));
        }
        if !(self.rho > 0.0) {
            return Err(Error::InvalidConfiguration(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.svd_tol > 0.0) || self.svd_max_iter == 0 {
            return Err(Error::InvalidConfiguration("invalid SVD tolerance or iteration cap".into()));
        }
        Ok(())
    }
}

/// Which autocorrelation axis to read phases from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagAxis {
    /// First column `r[m, 0]`: the receive (AoA) direction.
    Col0,
    /// First row `r[0, n]`: the transmit (AoD) direction.
    Row0,
}

/// One per-path step of a run, recorded for debugging dumps.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub round: usize,
    pub path: usize,
    pub rank_one_applied: bool,
    /// Observation with every other current estimate cancelled.
    pub residual: ComplexMatrix,
    pub estimate: PathEstimate,
}

/// Best rank-one approximation `s u v^H` via the dominant singular triplet.
pub fn extract_rank_one(residual: &ComplexMatrix, tol: f64, max_iter: usize) -> Result<ComplexMatrix> {
    Ok(dominant_singular_triplet(residual, tol, max_iter)?.rank_one())
}

/// First-order phase differences along one autocorrelation axis, with the
/// leading element fixed at 0.
pub fn phase_differences(r: &ComplexMatrix, axis: LagAxis) -> Vec<f64> {
    let seq: Vec<Complex64> = match axis {
        LagAxis::Col0 => r.column(0),
        LagAxis::Row0 => r.row(0).to_vec(),
    };
    let mut out = Vec::with_capacity(seq.len());
    out.push(0.0);
    for w in seq.windows(2) {
        out.push((w[1] * w[0].conj()).arg());
    }
    out
}

/// Population variance.
fn variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Keep the differences in `[-pi, pi]` or move all of them to `[0, 2pi)`,
/// whichever has the smaller variance. Ties keep the original. The upper
/// branch is half-open so that a zero difference stays zero.
pub fn select_wrap_branch(delta: &[f64]) -> Vec<f64> {
    let wrapped: Vec<f64> = delta.iter().map(|&d| d.rem_euclid(2.0 * PI)).collect();
    if variance(delta) > variance(&wrapped) {
        wrapped
    } else {
        delta.to_vec()
    }
}

pub fn unwrap_cumsum(delta: &[f64]) -> Vec<f64> {
    delta
        .iter()
        .scan(0.0, |acc, &d| {
            *acc += d;
            Some(*acc)
        })
        .collect()
}

/// `w_i = (M+1)(M-i)/(i+1)`: inverse of the variance growth of the
/// accumulated phase.
pub fn wls_weights(len: usize) -> Vec<f64> {
    let m = len as f64;
    (0..len).map(|i| (m + 1.0) * (m - i as f64) / (i as f64 + 1.0)).collect()
}

/// Weighted least-squares slope of `phases[i]` against `i`.
pub fn wls_slope(phases: &[f64], weights: &[f64]) -> f64 {
    assert_eq!(phases.len(), weights.len(), "phases and weights differ in length");
    assert!(phases.len() >= 2, "need at least two points for a slope");
    let sw: f64 = weights.iter().sum();
    let x_bar = weights.iter().enumerate().map(|(i, w)| w * i as f64).sum::<f64>() / sw;
    let y_bar = weights.iter().zip(phases).map(|(w, p)| w * p).sum::<f64>() / sw;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (w, p)) in weights.iter().zip(phases).enumerate() {
        let dx = i as f64 - x_bar;
        num += w * dx * (p - y_bar);
        den += w * dx * dx;
    }
    num / den
}

/// Spatial frequency along one axis of the autocorrelation, wrapped to
/// `[-pi, pi]`.
pub fn estimate_frequency(r: &ComplexMatrix, axis: LagAxis) -> f64 {
    let delta = select_wrap_branch(&phase_differences(r, axis));
    let phases = unwrap_cumsum(&delta);
    let slope = wls_slope(&phases, &wls_weights(phases.len()));
    wrap(slope, -PI, PI).clamp(-PI, PI)
}

/// `|alpha|` from the lag-weighted mean autocorrelation magnitude (lag (0,0)
/// excluded, where the noise power concentrates).
pub fn estimate_amplitude(r: &ComplexMatrix, rho: f64, n_t: usize, n_r: usize) -> f64 {
    assert_eq!(r.shape(), (n_r, n_t), "autocorrelation must be n_r x n_t");
    let total = (n_r * (n_r + 1) * n_t * (n_t + 1)) as f64 / 4.0 - (n_t * n_r) as f64;
    let norm = 1.0 / total;
    let mut acc = 0.0;
    for m in 0..n_r {
        for n in 0..n_t {
            if (m, n) != (0, 0) {
                acc += lag_count(n_r, n_t, m, n) as f64 * r[(m, n)].norm();
            }
        }
    }
    let a_sq = norm * acc / rho;
    ((n_t * n_r) as f64).sqrt() * a_sq.sqrt()
}

/// Phase of the derotated mean of `d_tilde` at the given frequencies.
pub fn estimate_gain_phase(d_tilde: &ComplexMatrix, omega_aoa: f64, omega_aod: f64, rho: f64) -> Result<f64> {
    let (n_r, n_t) = d_tilde.shape();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..n_r {
        for n in 0..n_t {
            acc += d_tilde[(m, n)] * Complex64::from_polar(1.0, -(omega_aoa * m as f64 + omega_aod * n as f64));
        }
    }
    let mean = acc / ((n_r * n_t) as f64 * rho.sqrt());
    if mean.norm() == 0.0 || !mean.norm().is_finite() {
        return Err(Error::UndefinedPhase);
    }
    Ok(mean.arg())
}

/// `n_r x n_t` cisoid `(|alpha| / sqrt(n_t n_r)) e^{j angle(alpha)} e^{j(w_psi m + w_phi n)}`.
pub fn reconstruct_path(est: &PathEstimate, n_t: usize, n_r: usize) -> ComplexMatrix {
    let a = est.gain() / ((n_t * n_r) as f64).sqrt();
    ComplexMatrix::from_fn(n_r, n_t, |m, n| {
        a * Complex64::from_polar(1.0, est.omega_aoa * m as f64 + est.omega_aod * n as f64)
    })
}

/// Channel matrix rebuilt from path estimates.
pub fn reconstruct_channel(estimates: &[PathEstimate], n_t: usize, n_r: usize) -> ComplexMatrix {
    crate::channel::synthesize(estimates, n_t, n_r)
}

/// Estimate one path from a (possibly rank-one reduced) observation.
fn estimate_path(d_tilde: &ComplexMatrix, cfg: &TsdceConfig) -> Result<PathEstimate> {
    let r = acf2d_unbiased(d_tilde);
    let omega_aoa = estimate_frequency(&r, LagAxis::Col0);
    let omega_aod = estimate_frequency(&r, LagAxis::Row0);
    let magnitude = estimate_amplitude(&r, cfg.rho, cfg.n_t, cfg.n_r);
    let phase = match estimate_gain_phase(d_tilde, omega_aoa, omega_aod, cfg.rho) {
        Ok(p) => p,
        Err(Error::UndefinedPhase) => 0.0,
        Err(e) => return Err(e),
    };
    PathParams::from_frequencies(Complex64::from_polar(magnitude, phase), omega_aod, omega_aoa)
}

/// Full estimator on a training observation.
pub fn run(obs: &Observation, cfg: &TsdceConfig) -> Result<Vec<PathEstimate>> {
    run_inner(obs, cfg, None)
}

/// Like [`run`], also returning every per-path step.
pub fn run_traced(obs: &Observation, cfg: &TsdceConfig) -> Result<(Vec<PathEstimate>, Vec<TraceStep>)> {
    let mut trace = Vec::new();
    let est = run_inner(obs, cfg, Some(&mut trace))?;
    Ok((est, trace))
}

/// Estimator on an already cropped spatial observation `d_bar` (`n_r x n_t`).
pub fn run_on_spatial(d_bar: &ComplexMatrix, cfg: &TsdceConfig) -> Result<Vec<PathEstimate>> {
    estimate_from_spatial(d_bar, cfg, None)
}

fn run_inner(obs: &Observation, cfg: &TsdceConfig, trace: Option<&mut Vec<TraceStep>>) -> Result<Vec<PathEstimate>> {
    cfg.validate()?;
    let (q, p) = obs.y.shape();
    if q < cfg.n_r || p < cfg.n_t {
        return Err(Error::InvalidConfiguration(format!(
            "observation {q}x{p} smaller than the {}x{} array",
            cfg.n_r, cfg.n_t
        )));
    }
    let sp = to_spatial(obs, cfg.n_t, cfg.n_r)?;
    estimate_from_spatial(&sp.d_bar, cfg, trace)
}

fn estimate_from_spatial(
    d_bar: &ComplexMatrix,
    cfg: &TsdceConfig,
    mut trace: Option<&mut Vec<TraceStep>>,
) -> Result<Vec<PathEstimate>> {
    cfg.validate()?;
    if d_bar.shape() != (cfg.n_r, cfg.n_t) {
        return Err(Error::InvalidConfiguration(format!(
            "spatial block is {:?}, expected {}x{}",
            d_bar.shape(),
            cfg.n_r,
            cfg.n_t
        )));
    }
    let sqrt_rho = cfg.rho.sqrt();
    let mut estimates: Vec<Option<PathEstimate>> = vec![None; cfg.l_desired];
    let mut components: Vec<Option<ComplexMatrix>> = vec![None; cfg.l_desired];

    for round in 1..=cfg.rounds {
        for l in 0..cfg.l_desired {
            let mut residual = d_bar.clone();
            for (i, c) in components.iter().enumerate() {
                if let (true, Some(c)) = (i != l, c) {
                    residual = &residual - &c.scale_real(sqrt_rho);
                }
            }
            // Rank-one reduction in the first round only, except for the last
            // path whose residual already has the others removed. A single
            // path still gets the reduction.
            let rank_one = round == 1 && (l + 1 < cfg.l_desired || cfg.l_desired == 1);
            let d_tilde = if rank_one {
                match extract_rank_one(&residual, cfg.svd_tol, cfg.svd_max_iter) {
                    Ok(m) => m,
                    Err(e) => {
                        return Err(Error::Estimation {
                            source: Box::new(e),
                            partial: estimates.iter().flatten().copied().collect(),
                        })
                    }
                }
            } else {
                residual.clone()
            };
            let est = estimate_path(&d_tilde, cfg)?;
            components[l] = Some(reconstruct_path(&est, cfg.n_t, cfg.n_r));
            estimates[l] = Some(est);
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceStep {
                    round,
                    path: l,
                    rank_one_applied: rank_one,
                    residual,
                    estimate: est,
                });
            }
        }
    }
    Ok(estimates.into_iter().flatten().collect())
}
