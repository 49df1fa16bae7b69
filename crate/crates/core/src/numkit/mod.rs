//! Small self-contained numerical kernel: dense complex matrices, seeded
//! Gaussian sampling, the 2D DFT pair, the dominant singular triplet and the
//! unbiased 2D sample autocorrelation.

mod acf;
pub mod dft;
mod eigen;
mod matrix;
mod rng;
mod svd;

pub use acf::{acf2d_unbiased, lag_count};
pub use dft::{dft2d, Direction};
pub use eigen::{symmetric_eigen, symmetric_pinv};
pub use matrix::ComplexMatrix;
pub use rng::{sample_complex_gaussian, SeededRng};
pub use svd::{dominant_singular_triplet, SingularTriplet, DEFAULT_SVD_MAX_ITER, DEFAULT_SVD_TOL};

/// Principal value of `x` wrapped into `[lo, hi]` using
/// `x - (hi - lo) * ceil((x - hi) / (hi - lo))`.
#[inline]
pub fn wrap(x: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    x - w * ((x - hi) / w).ceil()
}
