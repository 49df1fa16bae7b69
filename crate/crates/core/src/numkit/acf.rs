use num_complex::Complex64;

use super::ComplexMatrix;

/// Unbiased 2D sample autocorrelation over non-negative lags:
/// `R[m,n] = 1/((rows-m)(cols-n)) * sum conj(M[mu,nu]) M[mu+m, nu+n]`.
///
/// On a pure cisoid `A exp(j(w1 m + w2 n))` every lag is exactly
/// `|A|^2 exp(j(w1 m + w2 n))`.
pub fn acf2d_unbiased(m: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    let mut r = ComplexMatrix::zeros(rows, cols);
    for lag_r in 0..rows {
        for lag_c in 0..cols {
            let mut acc = Complex64::new(0.0, 0.0);
            for mu in 0..rows - lag_r {
                let a = m.row(mu);
                let b = m.row(mu + lag_r);
                for nu in 0..cols - lag_c {
                    acc += a[nu].conj() * b[nu + lag_c];
                }
            }
            let kappa = ((rows - lag_r) * (cols - lag_c)) as f64;
            r[(lag_r, lag_c)] = acc / kappa;
        }
    }
    r
}

/// Number of products averaged at lag `(m, n)`.
#[inline]
pub fn lag_count(rows: usize, cols: usize, m: usize, n: usize) -> usize {
    (rows - m) * (cols - n)
}
