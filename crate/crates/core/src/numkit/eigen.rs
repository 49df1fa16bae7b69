/// Real symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// `a` is row-major `n x n`. Returns eigenvalues (unsorted) and eigenvectors
/// as columns of a row-major `n x n` matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[i * n + i]).collect(), v)
}

/// Pseudo-inverse of a real symmetric PSD matrix with eigenvalues below
/// `floor_ratio * lambda_max` discarded. Returns the inverse and whether any
/// eigenvalue was floored.
pub fn symmetric_pinv(a: &[f64], n: usize, floor_ratio: f64) -> (Vec<f64>, bool) {
    let (vals, vecs) = symmetric_eigen(a, n);
    let lmax = vals.iter().cloned().fold(0.0, f64::max);
    let floor = floor_ratio * lmax;
    let mut floored = false;
    let mut out = vec![0.0; n * n];
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= floor || lam <= 0.0 {
            floored = true;
            continue;
        }
        let inv = 1.0 / lam;
        for i in 0..n {
            let vi = vecs[i * n + k] * inv;
            for j in 0..n {
                out[i * n + j] += vi * vecs[j * n + k];
            }
        }
    }
    (out, floored)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalizes_small_matrix() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0];
        let (vals, vecs) = symmetric_eigen(&a, 3);
        for k in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i * 3 + j] * vecs[j * 3 + k]).sum();
                assert!((av - vals[k] * vecs[i * 3 + k]).abs() < 1e-12);
            }
        }
        let tr: f64 = vals.iter().sum();
        assert!((tr - 8.0).abs() < 1e-12);
    }

    #[test]
    fn pinv_inverts_full_rank() {
        let a = [2.0, 0.5, 0.5, 1.0];
        let (inv, floored) = symmetric_pinv(&a, 2, 1e-12);
        assert!(!floored);
        let det = 2.0 - 0.25;
        let expect = [1.0 / det, -0.5 / det, -0.5 / det, 2.0 / det];
        for (x, y) in inv.iter().zip(expect) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn pinv_flags_singular() {
        let a = [1.0, 1.0, 1.0, 1.0];
        let (inv, floored) = symmetric_pinv(&a, 2, 1e-12);
        assert!(floored);
        for x in inv {
            assert!((x - 0.25).abs() < 1e-12);
        }
    }
}
