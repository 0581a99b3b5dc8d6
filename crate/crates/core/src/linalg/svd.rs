//! Singular values by one-sided Jacobi orthogonalization.

use num_complex::Complex64;

use super::ComplexMatrix;

const MAX_SWEEPS: usize = 60;
const ORTHO_EPS: f64 = 1e-14;

/// Singular values of a dense complex matrix, sorted descending.
///
/// One-sided Jacobi rotates column pairs until all columns are mutually
/// orthogonal; the singular values are then the column norms. Unlike going
/// through the Gram matrix spectrum, this keeps full relative accuracy on
/// the small singular values. The matrix is transposed first when that
/// gives fewer columns to rotate.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let work = if m.cols() > m.rows() {
        m.adjoint()
    } else {
        m.clone()
    };
    let rows = work.rows();
    let cols = work.cols();
    if rows == 0 || cols == 0 {
        return vec![];
    }

    // Columns as contiguous vectors.
    let mut col: Vec<Vec<Complex64>> = (0..cols)
        .map(|j| (0..rows).map(|i| work[(i, j)]).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols - 1 {
            for q in p + 1..cols {
                let (npp, nqq, pq) = pair_products(&col[p], &col[q]);
                let mag = pq.norm();
                if mag <= ORTHO_EPS * (npp * nqq).sqrt() || mag == 0.0 {
                    continue;
                }
                rotated = true;
                let phi = pq / mag;
                let tau = (nqq - npp) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                let phi_cs = phi * cs;
                let phi_sn = phi * sn;
                for r in 0..rows {
                    let vp = col[p][r];
                    let vq = col[q][r];
                    col[p][r] = phi_cs * vp - sn * vq;
                    col[q][r] = phi_sn * vp + cs * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = col
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sigma
}

fn pair_products(p: &[Complex64], q: &[Complex64]) -> (f64, f64, Complex64) {
    let mut npp = 0.0;
    let mut nqq = 0.0;
    let mut pq = Complex64::new(0.0, 0.0);
    for (a, b) in p.iter().zip(q) {
        npp += a.norm_sqr();
        nqq += b.norm_sqr();
        pq += a.conj() * b;
    }
    (npp, nqq, pq)
}
