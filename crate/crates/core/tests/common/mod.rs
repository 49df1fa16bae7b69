//! Independent reference implementations used only by tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use num_complex::Complex64;
use tsdce::channel::PathParams;
use tsdce::numkit::ComplexMatrix;
use tsdce::observation::Codebook;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Smallest signed difference between two angles.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    (a - b + PI).rem_euclid(2.0 * PI) - PI
}

/// Column-major `vec`.
pub fn vec_cols(m: &ComplexMatrix) -> Vec<Complex64> {
    let (r, cc) = m.shape();
    (0..cc).flat_map(|j| (0..r).map(move |i| (i, j))).map(|(i, j)| m[(i, j)]).collect()
}

pub fn unvec_cols(v: &[Complex64], rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |i, j| v[j * rows + i])
}

/// `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row: Vec<Complex64> = a.row(i).to_vec();
            row.push(b[i]);
            row
        })
        .collect();
    for k in 0..n {
        let piv = (k..n).max_by(|&x, &y| m[x][k].norm().total_cmp(&m[y][k].norm())).unwrap();
        m.swap(k, piv);
        let d = m[k][k];
        assert!(d.norm() > 1e-300, "singular system");
        for i in k + 1..n {
            let f = m[i][k] / d;
            if f.norm() == 0.0 {
                continue;
            }
            for j in k..=n {
                let t = m[k][j];
                m[i][j] -= f * t;
            }
        }
    }
    let mut x = vec![c(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = m[i][n];
        for j in i + 1..n {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    x
}

/// `vec(H_LS) = (1/sqrt(rho)) (Q^H Q)^{-1} Q^H vec(Y)` with `Q = F^T ⊗ W^H`,
/// built and solved explicitly.
pub fn kronecker_ls(y: &ComplexMatrix, cb: &Codebook, rho: f64) -> ComplexMatrix {
    let q = kron(&cb.f.transpose(), &cb.w.conj_transpose());
    let qh = q.conj_transpose();
    let gram = qh.matmul(&q);
    let rhs = qh.mul_vec(&vec_cols(y));
    let x: Vec<Complex64> = solve(&gram, &rhs).into_iter().map(|z| z / rho.sqrt()).collect();
    unvec_cols(&x, cb.n_r(), cb.n_t())
}

/// Eigenvalues of a real symmetric matrix by classical (largest off-diagonal)
/// Jacobi rotations. Sorted descending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 * n * n {
        let (mut p, mut q, mut big) = (0, 1, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                if a[i][j].abs() > big {
                    big = a[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        let scale: f64 = (0..n).map(|i| a[i][i].abs()).sum::<f64>().max(1e-300);
        if big < 1e-14 * scale {
            break;
        }
        let phi = 0.5 * (2.0 * a[p][q]).atan2(a[q][q] - a[p][p]);
        let (s, co) = phi.sin_cos();
        for k in 0..n {
            let (akp, akq) = (a[k][p], a[k][q]);
            a[k][p] = co * akp - s * akq;
            a[k][q] = s * akp + co * akq;
        }
        for k in 0..n {
            let (apk, aqk) = (a[p][k], a[q][k]);
            a[p][k] = co * apk - s * aqk;
            a[q][k] = s * apk + co * aqk;
        }
    }
    let mut v: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

/// Eigenvalues of a Hermitian matrix through its real symmetric embedding
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is each eigenvalue twice.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.rows();
    let mut a = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    jacobi_eigenvalues(a).into_iter().step_by(2).collect()
}

/// Largest singular value as the square root of the top eigenvalue of `M^H M`.
pub fn top_singular_value(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(&m.conj_transpose().matmul(m))[0].max(0.0).sqrt()
}

/// Minimum total cost over every injective assignment of the smaller set.
pub fn brute_force_assignment(cost: &[Vec<f64>]) -> f64 {
    let n_true = cost.len();
    let n_est = cost.first().map_or(0, Vec::len);
    let k = n_true.min(n_est);
    let mut best = f64::INFINITY;
    // choose k true rows and an ordered selection of k estimates
    let rows: Vec<usize> = (0..n_true).collect();
    for chosen in combinations(&rows, k) {
        let cols: Vec<usize> = (0..n_est).collect();
        for perm in permutations_of(&cols, k) {
            let total: f64 = chosen.iter().zip(&perm).map(|(&i, &j)| cost[i][j]).sum();
            best = best.min(total);
        }
    }
    best
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for mut rest in combinations(&items[1..], k - 1) {
        rest.insert(0, items[0]);
        out.push(rest);
    }
    out.extend(combinations(&items[1..], k));
    out
}

fn permutations_of(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations_of(&rest, k - 1) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

pub fn angle_cost(t: &PathParams, e: &PathParams) -> f64 {
    ((t.aoa - e.aoa).abs() + (t.aod - e.aod).abs()).to_degrees()
}

/// Central finite difference of a matrix-valued function of one real.
pub fn central_difference(f: impl Fn(f64) -> ComplexMatrix, x: f64, h: f64) -> ComplexMatrix {
    (&f(x + h) - &f(x - h)).scale_real(0.5 / h)
}

/// Mean and standard error.
pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
