//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! At the matrix sizes this crate works with (9x9 and below) the Jacobi
//! method is accurate to close to machine precision and fully deterministic:
//! fixed pivot order, no pivot search, no randomness.

use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector, Spectrum};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;
const HERMITICITY_PRE: f64 = 1e-10;

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come out ascending. Each eigenvector is phase-normalized so
/// that its largest-magnitude entry (lowest index on ties) is real positive,
/// which makes the output deterministic.
pub fn eigh(h: &ComplexMatrix) -> Result<Spectrum> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigh needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITICITY_PRE {
        return Err(Error::NonHermitianInput { defect });
    }
    let n = h.rows();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: vec![],
            eigenvectors: vec![],
        });
    }

    // Symmetrize once so accumulated roundoff in the input cannot bias the
    // rotations, then iterate Jacobi sweeps.
    let mut a = h.add(&h.adjoint()).scale_real(0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let target = 1e-15 * scale * n as f64;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q, scale);
            }
        }
    }

    // Collect, sort ascending with index tie-break, fix phases.
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap().then(i.cmp(&j)));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    for &k in &order {
        eigenvalues.push(diag[k]);
        let col = ComplexVector::new((0..n).map(|r| v[(r, k)]).collect());
        eigenvectors.push(fix_phase(col));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                acc += a[(p, q)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One Jacobi rotation zeroing the (p, q) entry.
///
/// The pivot h = |h| phi is first made real by the unitary diag(phi, 1),
/// then a standard real rotation with tan t = sgn(tau)/(|tau| + sqrt(1+tau^2)),
/// tau = (a_qq - a_pp)/(2|h|), annihilates it. The combined 2x2 unitary is
///   U = [[phi cs, phi sn], [-sn, cs]].
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, scale: f64) {
    let n = a.rows();
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= 1e-18 * scale {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phi = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    let phi_cs = phi * cs;
    let phi_sn = phi * sn;

    // Column update A <- A U.
    for r in 0..n {
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        a[(r, p)] = phi_cs * arp - sn * arq;
        a[(r, q)] = phi_sn * arp + cs * arq;
    }
    // Row update A <- U^dag A.
    for c in 0..n {
        let apc = a[(p, c)];
        let aqc = a[(q, c)];
        a[(p, c)] = phi_cs.conj() * apc - sn * aqc;
        a[(q, c)] = phi_sn.conj() * apc + cs * aqc;
    }
    // The rotation is exact on the 2x2 block; pin the known values.
    a[(p, p)] = Complex64::new(app - t * mag, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * mag, 0.0);
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);

    // Accumulate V <- V U.
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = phi_cs * vrp - sn * vrq;
        v[(r, q)] = phi_sn * vrp + cs * vrq;
    }
}

fn fix_phase(v: ComplexVector) -> ComplexVector {
    let n = v.dim();
    let mut best = 0usize;
    let mut mag = 0.0f64;
    for i in 0..n {
        let m = v[i].norm();
        if m > mag {
            mag = m;
            best = i;
        }
    }
    if mag == 0.0 {
        return v;
    }
    let phase = v[best].conj() / mag;
    v.scale(phase)
}
