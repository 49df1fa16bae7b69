use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_SVD_TOL: f64 = 1e-12;
pub const DEFAULT_SVD_MAX_ITER: usize = 10_000;

/// Leading singular value with its unit left/right singular vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriplet {
    pub s: f64,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl SingularTriplet {
    /// `s u v^H`.
    pub fn rank_one(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.u, &self.v).scale_real(self.s)
    }
}

/// Dominant singular triplet by power iteration on `M^H M`.
///
/// Converged when `||M^H u - s v|| <= tol * ||M||_F` (the forward residual
/// `M v - s u` vanishes by construction). The first entry of `u` that is not
/// negligible is rotated to zero phase, with the compensating rotation
/// applied to `v`.
pub fn dominant_singular_triplet(m: &ComplexMatrix, tol: f64, max_iter: usize) -> Result<SingularTriplet> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let (rows, cols) = m.shape();
    let fro = m.frobenius_norm();
    if fro == 0.0 {
        return Ok(SingularTriplet {
            s: 0.0,
            u: unit_vector(rows),
            v: unit_vector(cols),
        });
    }

    // Start from the heaviest row: it lies in the row space, so it cannot be
    // orthogonal to every right singular vector with nonzero singular value.
    let start_row = (0..rows)
        .max_by(|&a, &b| {
            let na: f64 = m.row(a).iter().map(|z| z.norm_sqr()).sum();
            let nb: f64 = m.row(b).iter().map(|z| z.norm_sqr()).sum();
            na.total_cmp(&nb)
        })
        .unwrap_or(0);
    let mut v: Vec<Complex64> = m.row(start_row).iter().map(|z| z.conj()).collect();
    normalize(&mut v);

    let mut s = 0.0;
    let mut u = vec![Complex64::new(0.0, 0.0); rows];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let w = m.mul_vec(&v);
        s = norm(&w);
        if s == 0.0 {
            // v fell into the null space; can only happen through cancellation
            break;
        }
        u = w.iter().map(|z| z / s).collect();
        let z = m.adjoint_mul_vec(&u);
        residual = z
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * s).norm_sqr())
            .sum::<f64>()
            .sqrt();
        v = z;
        normalize(&mut v);
        if residual <= tol * fro {
            let w = m.mul_vec(&v);
            s = norm(&w);
            u = w.iter().map(|z| z / s).collect();
            return Ok(fix_phase(SingularTriplet { s, u, v }));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: residual / fro,
        last: Box::new(fix_phase(SingularTriplet { s, u, v })),
    })
}

fn fix_phase(mut t: SingularTriplet) -> SingularTriplet {
    let peak = t.u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(first) = t.u.iter().find(|z| z.norm() > peak * 1e-12) {
        let rot = Complex64::from_polar(1.0, -first.arg());
        t.u.iter_mut().for_each(|z| *z *= rot);
        t.v.iter_mut().for_each(|z| *z *= rot);
    }
    t
}

fn unit_vector(n: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[0] = Complex64::new(1.0, 0.0);
    e
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
}
