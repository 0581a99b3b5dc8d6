//! Dense complex linear algebra at desk scale.
//!
//! Everything here operates on small matrices (9x9 is the typical size) in
//! row-major storage. The bipartite basis ordering is fixed throughout the
//! crate: the product basis vector |i,j> of C^dA (x) C^dB maps to flat index
//! `i * dB + j`.

mod eigh;
mod svd;

pub use eigh::eigh;
pub use svd::singular_values;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which tensor factor an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

// ---------------------------------------------------------------------------
// ComplexVector
// ---------------------------------------------------------------------------

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        ComplexVector { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexVector {
            entries: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// Standard basis vector |index> in the given dimension.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut v = Self::zeros(dim);
        v.entries[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        ComplexVector {
            entries: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// <self|other> with conjugation on `self`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn normalized(&self) -> ComplexVector {
        let n = self.norm();
        assert!(n > 1e-300, "cannot normalize a zero vector");
        self.scale(Complex64::new(1.0 / n, 0.0))
    }

    pub fn scale(&self, factor: Complex64) -> ComplexVector {
        ComplexVector {
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim(), other.dim());
        ComplexVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Tensor product |self> (x) |other> in the fixed basis ordering.
    pub fn tensor(&self, other: &ComplexVector) -> ComplexVector {
        let mut entries = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a * b);
            }
        }
        ComplexVector { entries }
    }

    /// Rescale by a global phase so the first entry of magnitude above
    /// `tol` becomes real positive. A zero vector is returned unchanged.
    pub fn canonical_phase(&self, tol: f64) -> ComplexVector {
        for z in &self.entries {
            if z.norm() > tol {
                return self.scale(z.conj() / z.norm());
            }
        }
        self.clone()
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

impl std::ops::IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.entries[i]
    }
}

// ---------------------------------------------------------------------------
// ComplexMatrix
// ---------------------------------------------------------------------------

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        Ok(ComplexMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        ComplexMatrix {
            rows: r,
            cols: c,
            entries,
        }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// |v><w| outer product.
    pub fn outer(v: &ComplexVector, w: &ComplexVector) -> Self {
        let mut m = Self::zeros(v.dim(), w.dim());
        for i in 0..v.dim() {
            for j in 0..w.dim() {
                m[(i, j)] = v[i] * w[j].conj();
            }
        }
        m
    }

    /// Projector |v><v| / <v|v>.
    pub fn projector(v: &ComplexVector) -> Self {
        let n2 = v.norm();
        let u = v.scale(Complex64::new(1.0 / n2, 0.0));
        Self::outer(&u, &u)
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> ComplexMatrix {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> ComplexMatrix {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    m[(i, j)] += a * other[(k, j)];
                }
            }
        }
        m
    }

    pub fn matvec(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.cols, v.dim(), "matvec dimension mismatch");
        let mut out = ComplexVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// <v|M|v> as a complex number.
    pub fn quadratic_form(&self, v: &ComplexVector) -> Complex64 {
        v.inner(&self.matvec(v))
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ||M - M'||_F relative to ||M||_F (0 for the zero matrix).
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.sub(&self.adjoint()).frobenius_norm() / norm
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= rel_tol
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending, each
/// paired with an orthonormal eigenvector. The eigenvector phase is fixed
/// so its largest-magnitude entry is real positive (ties to lowest index).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<ComplexVector>,
}

impl Spectrum {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_vector(&self) -> &ComplexVector {
        &self.eigenvectors[0]
    }

    /// V diag(lambda) V', for reconstruction checks.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvectors[0].dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += Complex64::new(*lam, 0.0) * v[i] * v[j].conj();
                }
            }
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Free operations
// ---------------------------------------------------------------------------

/// Kronecker product A (x) B.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    m[(i * b.rows() + k, j * b.cols() + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    m
}

/// Partial transpose on one factor of an operator on C^dA (x) C^dB.
///
/// Transposing on B maps entry ((i,k),(j,l)) to ((i,l),(j,k)); on A it maps
/// ((i,k),(j,l)) to ((j,k),(i,l)). Applying the same transpose twice is the
/// identity, bit-exact.
pub fn partial_transpose(
    m: &ComplexMatrix,
    da: usize,
    db: usize,
    subsystem: Subsystem,
) -> Result<ComplexMatrix> {
    let n = da * db;
    if !m.is_square() || m.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected {}x{} operator for dA={}, dB={}, got {}x{}",
            n,
            n,
            da,
            db,
            m.rows(),
            m.cols()
        )));
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..da {
        for k in 0..db {
            for j in 0..da {
                for l in 0..db {
                    let (r, c) = match subsystem {
                        Subsystem::B => (i * db + l, j * db + k),
                        Subsystem::A => (j * db + k, i * db + l),
                    };
                    out[(r, c)] = m[(i * db + k, j * db + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Contract one factor of a bipartite operator with a local vector.
///
/// `side = B` returns the dA x dA operator M(i,j) = sum_{k,l} conj(v_k)
/// W((i,k),(j,l)) v_l; `side = A` the analogous dB x dB operator. The result
/// is Hermitian whenever W is, and positive semi-definite whenever W is
/// block-positive.
pub fn sandwich(
    w: &ComplexMatrix,
    da: usize,
    db: usize,
    side: Subsystem,
    v: &ComplexVector,
) -> Result<ComplexMatrix> {
    let n = da * db;
    if !w.is_square() || w.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, expected {}x{}",
            w.rows(),
            w.cols(),
            n,
            n
        )));
    }
    let expected = match side {
        Subsystem::B => db,
        Subsystem::A => da,
    };
    if v.dim() != expected {
        return Err(Error::DimensionMismatch(format!(
            "local vector has dimension {}, expected {}",
            v.dim(),
            expected
        )));
    }
    match side {
        Subsystem::B => {
            let mut m = ComplexMatrix::zeros(da, da);
            for i in 0..da {
                for j in 0..da {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..db {
                        let vk = v[k].conj();
                        if vk == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for l in 0..db {
                            acc += vk * w[(i * db + k, j * db + l)] * v[l];
                        }
                    }
                    m[(i, j)] = acc;
                }
            }
            Ok(m)
        }
        Subsystem::A => {
            let mut m = ComplexMatrix::zeros(db, db);
            for k in 0..db {
                for l in 0..db {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..da {
                        let vi = v[i].conj();
                        if vi == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for j in 0..da {
                            acc += vi * w[(i * db + k, j * db + l)] * v[j];
                        }
                    }
                    m[(k, l)] = acc;
                }
            }
            Ok(m)
        }
    }
}

/// Rank of the span of a vector list: the number of singular values of the
/// stacked matrix above `tol` times the largest one. Empty input gives 0.
pub fn span_dimension(vs: &[ComplexVector], tol: f64) -> usize {
    if vs.is_empty() {
        return 0;
    }
    let dim = vs[0].dim();
    assert!(
        vs.iter().all(|v| v.dim() == dim),
        "span input vectors must share one dimension"
    );
    let mut stacked = ComplexMatrix::zeros(dim, vs.len());
    for (j, v) in vs.iter().enumerate() {
        for i in 0..dim {
            stacked[(i, j)] = v[i];
        }
    }
    let sigma = singular_values(&stacked);
    let largest = sigma.first().copied().unwrap_or(0.0);
    if largest <= 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol * largest).count()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_min_eig(h: &ComplexMatrix) -> Result<f64> {
    Ok(eigh(h)?.min_eigenvalue())
}

/// PSD test: min eigenvalue >= -tol * ||H||_F.
pub fn is_psd(h: &ComplexMatrix, tol: f64) -> Result<bool> {
    let min = hermitian_min_eig(h)?;
    Ok(min >= -tol * h.frobenius_norm())
}
