use std::f64::consts::PI;

use num_complex::Complex64;

use super::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// 2D DFT with an unnormalized forward transform and a `1/(QP)`-scaled
/// inverse, so that `inverse(forward(M)) == M` and white noise of variance
/// `s` maps to element variance `s / (QP)` under the inverse.
///
/// Evaluated separably as direct sums over rows then columns; twiddles are
/// indexed by `(k * m) mod N` so on-grid phases are exact table lookups.
pub fn dft2d(m: &ComplexMatrix, direction: Direction) -> ComplexMatrix {
    let (rows, cols) = m.shape();
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let tw_cols = twiddles(cols, sign);
    let tw_rows = twiddles(rows, sign);

    // along each row (index n -> p)
    let mut stage = ComplexMatrix::zeros(rows, cols);
    for r in 0..rows {
        let src = m.row(r);
        for p in 0..cols {
            let mut acc = Complex64::new(0.0, 0.0);
            for (n, x) in src.iter().enumerate() {
                acc += x * tw_cols[(p * n) % cols];
            }
            stage[(r, p)] = acc;
        }
    }

    // along each column (index m -> q)
    let scale = match direction {
        Direction::Forward => 1.0,
        Direction::Inverse => 1.0 / (rows * cols) as f64,
    };
    let mut out = ComplexMatrix::zeros(rows, cols);
    for q in 0..rows {
        for r in 0..rows {
            let w = tw_rows[(q * r) % rows] * scale;
            let src = stage.row(r);
            for p in 0..cols {
                out[(q, p)] += w * src[p];
            }
        }
    }
    out
}

pub fn forward(m: &ComplexMatrix) -> ComplexMatrix {
    dft2d(m, Direction::Forward)
}

pub fn inverse(m: &ComplexMatrix) -> ComplexMatrix {
    dft2d(m, Direction::Inverse)
}

fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::SeededRng;

    fn random(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut rng = SeededRng::new(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| rng.complex_gaussian(1.0).unwrap())
    }

    /// Textbook double sum, kept separate from the separable implementation.
    fn naive_forward(m: &ComplexMatrix) -> ComplexMatrix {
        let (qn, pn) = m.shape();
        ComplexMatrix::from_fn(qn, pn, |q, p| {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..qn {
                for b in 0..pn {
                    let ph = -2.0 * PI * (q as f64 * a as f64 / qn as f64 + p as f64 * b as f64 / pn as f64);
                    acc += m[(a, b)] * Complex64::from_polar(1.0, ph);
                }
            }
            acc
        })
    }

    #[test]
    fn zeros_map_to_zeros() {
        let z = ComplexMatrix::zeros(4, 6);
        assert_eq!(forward(&z), z);
    }

    #[test]
    fn inverse_of_constant_is_delta() {
        let c = Complex64::new(0.3, -1.2);
        let m = ComplexMatrix::from_fn(8, 4, |_, _| c);
        let d = inverse(&m);
        assert!((d[(0, 0)] - c).norm() < 1e-14);
        for q in 0..8 {
            for p in 0..4 {
                if (q, p) != (0, 0) {
                    assert!(d[(q, p)].norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn round_trip_8x8() {
        let m = random(8, 8, 3);
        let back = inverse(&forward(&m));
        assert!(back.relative_error(&m) < 1e-12);
    }

    #[test]
    fn matches_naive_sum_on_rectangular_input() {
        let m = random(5, 7, 9);
        let fast = forward(&m);
        let slow = naive_forward(&m);
        assert!(fast.relative_error(&slow) < 1e-12);
    }

    #[test]
    fn parseval() {
        let m = random(6, 10, 21);
        let f = forward(&m);
        let lhs = m.frobenius_norm_sq();
        let rhs = f.frobenius_norm_sq() / 60.0;
        assert!((lhs - rhs).abs() < 1e-10 * lhs);
    }

    #[test]
    fn inverse_noise_variance_scales_by_one_over_qp() {
        let (q, p) = (32, 32);
        let sigma = 2.5;
        let mut rng = SeededRng::new(99);
        let mut acc = 0.0;
        let mut count = 0usize;
        // 100 matrices of 1024 entries = 1e5 elements
        for _ in 0..100 {
            let n = ComplexMatrix::from_fn(q, p, |_, _| rng.complex_gaussian(sigma).unwrap());
            let z = inverse(&n);
            acc += z.frobenius_norm_sq();
            count += q * p;
        }
        let var = acc / count as f64;
        let expect = sigma / (q * p) as f64;
        assert!((var / expect - 1.0).abs() < 0.03, "{var} vs {expect}");
    }
}
