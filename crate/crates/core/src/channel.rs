//! Geometric narrowband mmWave channel between two uniform linear arrays with
//! half-wavelength spacing.
//!
//! A path with AoD `phi` and AoA `psi` appears in the channel matrix as the
//! 2D cisoid `alpha * exp(j(w_psi m + w_phi n))` with spatial frequencies
//! `w_phi = pi cos(phi)` and `w_psi = -pi cos(psi)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::{ComplexMatrix, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArraySide {
    Tx,
    Rx,
}

/// Which angle a spatial frequency refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleKind {
    Aoa,
    Aod,
}

/// One propagation path. Angles in radians, frequencies in radians/sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    pub gain_magnitude: f64,
    pub gain_phase: f64,
    pub aod: f64,
    pub aoa: f64,
    pub omega_aod: f64,
    pub omega_aoa: f64,
}

impl PathParams {
    /// Path from a complex gain and physical angles; frequencies are derived.
    pub fn from_angles(gain: Complex64, aod: f64, aoa: f64) -> Self {
        Self {
            gain_magnitude: gain.norm(),
            gain_phase: gain.arg(),
            aod,
            aoa,
            omega_aod: angle_to_freq(aod, AngleKind::Aod),
            omega_aoa: angle_to_freq(aoa, AngleKind::Aoa),
        }
    }

    /// Path from a complex gain and spatial frequencies; angles are derived
    /// in `[0, pi]`. Frequencies must lie in `[-pi, pi]`.
    pub fn from_frequencies(gain: Complex64, omega_aod: f64, omega_aoa: f64) -> Result<Self> {
        Ok(Self {
            gain_magnitude: gain.norm(),
            gain_phase: gain.arg(),
            aod: freq_to_angle(omega_aod, AngleKind::Aod)?,
            aoa: freq_to_angle(omega_aoa, AngleKind::Aoa)?,
            omega_aod,
            omega_aoa,
        })
    }

    pub fn gain(&self) -> Complex64 {
        Complex64::from_polar(self.gain_magnitude, self.gain_phase)
    }
}

/// Generated channel matrix together with the paths it was built from.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub n_t: usize,
    pub n_r: usize,
    /// Sorted by decreasing gain magnitude.
    pub paths: Vec<PathParams>,
    /// `n_r x n_t`.
    pub h: ComplexMatrix,
}

/// ULA response `(1/sqrt(n)) [1, e^{-j pi cos(angle)}, ..., e^{-j pi (n-1) cos(angle)}]`.
///
/// Tx and Rx use the same formula.
pub fn steering_vector(angle: f64, n: usize, _side: ArraySide) -> Vec<Complex64> {
    steering_from_cosine(angle.cos(), n)
}

/// Steering vector parameterized directly by `cos(angle)`.
pub fn steering_from_cosine(cosine: f64, n: usize) -> Vec<Complex64> {
    assert!(n >= 1, "array size must be at least 1");
    let amp = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| Complex64::from_polar(amp, -PI * k as f64 * cosine))
        .collect()
}

pub fn angle_to_freq(angle: f64, kind: AngleKind) -> f64 {
    match kind {
        AngleKind::Aod => PI * angle.cos(),
        AngleKind::Aoa => -PI * angle.cos(),
    }
}

/// Inverse of [`angle_to_freq`] onto `[0, pi]`.
pub fn freq_to_angle(omega: f64, kind: AngleKind) -> Result<f64> {
    if !(omega.abs() <= PI) {
        return Err(Error::InvalidArgument(format!(
            "spatial frequency {omega} outside [-pi, pi]"
        )));
    }
    let x = match kind {
        AngleKind::Aod => omega / PI,
        AngleKind::Aoa => -omega / PI,
    };
    Ok(x.clamp(-1.0, 1.0).acos())
}

/// Draw `count` paths with i.i.d. CN(0, 1/count) gains and AoD/AoA uniform on
/// `[lo, hi]`, sorted by decreasing gain magnitude.
pub fn sample_paths(count: usize, rng: &mut SeededRng, angle_range: (f64, f64)) -> Result<Vec<PathParams>> {
    let (lo, hi) = angle_range;
    if count == 0 {
        return Err(Error::InvalidArgument("path count must be at least 1".into()));
    }
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty angle range [{lo}, {hi}]")));
    }
    let variance = 1.0 / count as f64;
    let mut paths = Vec::with_capacity(count);
    for _ in 0..count {
        let gain = rng.complex_gaussian(variance)?;
        let aod = rng.uniform_range(lo, hi);
        let aoa = rng.uniform_range(lo, hi);
        paths.push(PathParams::from_angles(gain, aod, aoa));
    }
    paths.sort_by(|a, b| b.gain_magnitude.total_cmp(&a.gain_magnitude));
    Ok(paths)
}

/// `h[m,n] = sum_l alpha_l exp(j(w_psi_l m + w_phi_l n))`.
pub fn synthesize(paths: &[PathParams], n_t: usize, n_r: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(n_r, n_t);
    for p in paths {
        let alpha = p.gain();
        for m in 0..n_r {
            for n in 0..n_t {
                h[(m, n)] += alpha * Complex64::from_polar(1.0, p.omega_aoa * m as f64 + p.omega_aod * n as f64);
            }
        }
    }
    h
}

pub fn build_channel(paths: Vec<PathParams>, n_t: usize, n_r: usize) -> Result<ChannelRealization> {
    if n_t < 2 || n_r < 2 {
        return Err(Error::InvalidArgument(format!(
            "arrays need at least 2 antennas, got n_t={n_t}, n_r={n_r}"
        )));
    }
    let mut paths = paths;
    paths.sort_by(|a, b| b.gain_magnitude.total_cmp(&a.gain_magnitude));
    let h = synthesize(&paths, n_t, n_r);
    Ok(ChannelRealization { n_t, n_r, paths, h })
}
