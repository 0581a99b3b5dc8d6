//! Witness data model and the built-in witness families.
//!
//! The main family lives on C^3 (x) C^3 and is parameterized by an angle
//! `theta` and a positive weight `b`. In the fixed product basis ordering
//! (|i,j> -> 3i + j) it is the 9x9 operator
//!
//! ```text
//!     | 1    .    .    .    e't   .    .    .    e"t |
//!     | .    b    .    1    .    .    .    .    .   |
//!     | .    .    1/b  .    .    .    1    .    .   |
//!     | .    1    .    1/b  .    .    .    .    .   |
//!     | e"t  .    .    .    1    .    .    .    e't |        e't = exp(+i theta)
//!     | .    .    .    .    .    b    .    1    .   |        e"t = exp(-i theta)
//!     | .    .    1    .    .    .    b    .    .   |
//!     | .    .    .    .    .    1    .    1/b  .   |
//!     | e't  .    .    .    e"t  .    .    .    1   |
//! ```
//!
//! which splits into a 3x3 circulant block on span{|00>,|11>,|22>} plus three
//! rank-one blocks (1/b)|phi_i><phi_i| with phi_i = b|i-1,i> + |i,i-1>
//! (indices mod 3). The same operator is also reachable as
//! |w0><w0|^{T_A} + (1/b) sum_i |w_i><w_i|^{T_A} with w0 = |00>+|11>+|22>
//! and w_i = b|i-1,i> + e^{i theta}|i,i-1>; both routes are exposed so they
//! can be checked against each other.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{
    self, partial_transpose, ComplexMatrix, ComplexVector, Subsystem,
};

const FRAC_PI_3: f64 = std::f64::consts::FRAC_PI_3;

// ---------------------------------------------------------------------------
// Witness
// ---------------------------------------------------------------------------

/// A Hermitian operator on C^dA (x) C^dB together with its split dimensions.
#[derive(Debug, Clone)]
pub struct Witness {
    da: usize,
    db: usize,
    matrix: ComplexMatrix,
    label: String,
}

impl Witness {
    pub fn new(da: usize, db: usize, matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        let n = da * db;
        if !matrix.is_square() || matrix.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "witness matrix is {}x{}, expected {}x{} for dA={}, dB={}",
                matrix.rows(),
                matrix.cols(),
                n,
                n,
                da,
                db
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > Tolerances::default().herm_rel {
            return Err(Error::NonHermitianInput { defect });
        }
        Ok(Witness {
            da,
            db,
            matrix,
            label: label.into(),
        })
    }

    pub fn da(&self) -> usize {
        self.da
    }

    pub fn db(&self) -> usize {
        self.db
    }

    pub fn dim(&self) -> usize {
        self.da * self.db
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }

    /// Same witness scaled to unit trace. Errors when the trace is not
    /// positive, since the scaling would flip or destroy positivity.
    pub fn trace_normalized(&self) -> Result<Witness> {
        let tr = self.matrix.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "trace normalization needs a positive trace, got {tr:.3e}"
            )));
        }
        Ok(Witness {
            da: self.da,
            db: self.db,
            matrix: self.matrix.scale_real(1.0 / tr),
            label: self.label.clone(),
        })
    }

    /// A new witness dA, dB and label but a different matrix on the same space.
    pub fn with_matrix(&self, matrix: ComplexMatrix, label: impl Into<String>) -> Result<Witness> {
        Witness::new(self.da, self.db, matrix, label)
    }
}

// ---------------------------------------------------------------------------
// ProductVector
// ---------------------------------------------------------------------------

/// A pair of local unit vectors |e>, |f>.
#[derive(Debug, Clone)]
pub struct ProductVector {
    e: ComplexVector,
    f: ComplexVector,
}

impl ProductVector {
    pub fn new(e: ComplexVector, f: ComplexVector) -> Result<Self> {
        let tol = Tolerances::default().unit_norm;
        for (name, v) in [("e", &e), ("f", &f)] {
            if (v.norm() - 1.0).abs() > tol {
                return Err(Error::InvalidParams(format!(
                    "component {name} is not unit (norm {:.17})",
                    v.norm()
                )));
            }
        }
        Ok(ProductVector { e, f })
    }

    pub fn from_unnormalized(e: &ComplexVector, f: &ComplexVector) -> ProductVector {
        ProductVector {
            e: e.normalized(),
            f: f.normalized(),
        }
    }

    pub fn e(&self) -> &ComplexVector {
        &self.e
    }

    pub fn f(&self) -> &ComplexVector {
        &self.f
    }

    /// |e> (x) |f> as a dA*dB vector.
    pub fn tensor(&self) -> ComplexVector {
        self.e.tensor(&self.f)
    }

    /// Phase convention for reproducible comparisons: each local component
    /// is rescaled so its first nonzero entry is real positive.
    pub fn canonical(&self) -> ProductVector {
        ProductVector {
            e: self.e.canonical_phase(1e-12),
            f: self.f.canonical_phase(1e-12),
        }
    }

    /// |<e|e'><f|f'>|, which is 1 exactly when both pairs agree up to phase.
    pub fn fidelity(&self, other: &ProductVector) -> f64 {
        (self.e.inner(&other.e) * self.f.inner(&other.f)).norm()
    }
}

// ---------------------------------------------------------------------------
// Parameterized family
// ---------------------------------------------------------------------------

/// Parameters of the 3x3 witness family: an angle and a positive weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaKyeParams {
    pub theta: f64,
    pub b: f64,
}

impl HaKyeParams {
    pub fn new(theta: f64, b: f64) -> Self {
        HaKyeParams { theta, b }
    }

    /// Parameter validation. The strict domain is b > 0, b != 1 and
    /// 0 < |theta| < pi/3. With `allow_boundary` the closure needed by the
    /// parameter sweep is accepted as well: theta = 0 (where the operator is
    /// PSD rather than a witness), |theta| = pi/3, and b = 1 when theta = 0.
    pub fn validate(&self, allow_boundary: bool) -> Result<()> {
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(Error::InvalidParams(format!("b must be positive, got {}", self.b)));
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidParams("theta must be finite".into()));
        }
        if allow_boundary {
            if self.theta.abs() > FRAC_PI_3 {
                return Err(Error::InvalidParams(format!(
                    "|theta| must be at most pi/3, got {}",
                    self.theta
                )));
            }
            if self.b == 1.0 && self.theta != 0.0 {
                return Err(Error::InvalidParams(
                    "b = 1 is only allowed together with theta = 0".into(),
                ));
            }
        } else {
            if self.theta.abs() >= FRAC_PI_3 {
                return Err(Error::InvalidParams(format!(
                    "|theta| must be below pi/3, got {}",
                    self.theta
                )));
            }
            if self.theta == 0.0 {
                return Err(Error::InvalidParams(
                    "theta = 0 gives a PSD operator, not a witness; pass allow_boundary to build it".into(),
                ));
            }
            if self.b == 1.0 {
                return Err(Error::InvalidParams("b must differ from 1".into()));
            }
        }
        Ok(())
    }
}

/// 3-cycle shift S|i> = |i+1 mod 3>.
pub fn shift_operator() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]])
}

/// The circulant 3x3 block with first row (1, e^{i theta}, e^{-i theta}).
pub fn hakye_lambda_block(theta: f64) -> ComplexMatrix {
    let e = Complex64::from_polar(1.0, theta);
    let one = Complex64::new(1.0, 0.0);
    ComplexMatrix::new(
        3,
        3,
        vec![one, e, e.conj(), e.conj(), one, e, e, e.conj(), one],
    )
    .unwrap()
}

/// Flat indices of the two components of phi_i / w_i for i = 1, 2, 3:
/// (index of |i-1, i>, index of |i, i-1>), mod-3 arithmetic.
fn pair_indices(i: usize) -> (usize, usize) {
    let a = (i - 1) % 3;
    let b = i % 3;
    (a * 3 + b, b * 3 + a)
}

/// phi_i = b|i-1, i> + |i, i-1> as a 9-dimensional vector (i = 1, 2, 3).
pub fn hakye_phi_vector(i: usize, b: f64) -> ComplexVector {
    assert!((1..=3).contains(&i), "phi index must be 1, 2 or 3");
    let (hi, lo) = pair_indices(i);
    let mut v = ComplexVector::zeros(9);
    v[hi] = Complex64::new(b, 0.0);
    v[lo] = Complex64::new(1.0, 0.0);
    v
}

/// The rank-one block P_i = |phi_i><phi_i| as a 9x9 operator.
pub fn hakye_p_operator(i: usize, b: f64) -> ComplexMatrix {
    let phi = hakye_phi_vector(i, b);
    ComplexMatrix::outer(&phi, &phi)
}

/// w_0 = |00>+|11>+|22>; w_i = b|i-1,i> + e^{i theta}|i,i-1> for i = 1, 2, 3.
pub fn hakye_w_vector(i: usize, params: &HaKyeParams) -> ComplexVector {
    assert!(i <= 3, "w index must be 0..=3");
    let mut v = ComplexVector::zeros(9);
    if i == 0 {
        for k in 0..3 {
            v[k * 3 + k] = Complex64::new(1.0, 0.0);
        }
    } else {
        let (hi, lo) = pair_indices(i);
        v[hi] = Complex64::new(params.b, 0.0);
        v[lo] = Complex64::from_polar(1.0, params.theta);
    }
    v
}

/// The 9x9 family witness, assembled entry by entry from its block form.
pub fn hakye_witness(params: &HaKyeParams, allow_boundary: bool) -> Result<Witness> {
    params.validate(allow_boundary)?;
    let b = params.b;
    let mut m = ComplexMatrix::zeros(9, 9);
    // Circulant block on span{|00>, |11>, |22>} (flat indices 0, 4, 8).
    let lambda = hakye_lambda_block(params.theta);
    let diag = [0usize, 4, 8];
    for r in 0..3 {
        for c in 0..3 {
            m[(diag[r], diag[c])] = lambda[(r, c)];
        }
    }
    // Rank-one blocks (1/b)|phi_i><phi_i| written directly: entries b, 1, 1, 1/b.
    for i in 1..=3 {
        let (hi, lo) = pair_indices(i);
        m[(hi, hi)] = Complex64::new(b, 0.0);
        m[(hi, lo)] = Complex64::new(1.0, 0.0);
        m[(lo, hi)] = Complex64::new(1.0, 0.0);
        m[(lo, lo)] = Complex64::new(1.0 / b, 0.0);
    }
    Witness::new(3, 3, m, format!("hakye(theta={}, b={})", params.theta, b))
}

/// The same witness via |w0><w0|^{T_A} + (1/b) sum_i |w_i><w_i|^{T_A},
/// kept as an independent construction route for cross-checks.
pub fn hakye_witness_pt_route(params: &HaKyeParams, allow_boundary: bool) -> Result<Witness> {
    params.validate(allow_boundary)?;
    let w0 = hakye_w_vector(0, params);
    let mut m = partial_transpose(&ComplexMatrix::outer(&w0, &w0), 3, 3, Subsystem::A)?;
    for i in 1..=3 {
        let wi = hakye_w_vector(i, params);
        let pt = partial_transpose(&ComplexMatrix::outer(&wi, &wi), 3, 3, Subsystem::A)?;
        m = m.add(&pt.scale_real(1.0 / params.b));
    }
    Witness::new(
        3,
        3,
        m,
        format!("hakye-pt(theta={}, b={})", params.theta, params.b),
    )
}

/// The six product vectors with vanishing witness expectation, in the fixed
/// order (z1+, z1-, z2+, z2-, z3+, z3-), each canonically phased.
///
/// With omega = sqrt(b) e^{i theta/2} the unnormalized components are
///   z1(s) = (s, conj(omega), 0) (x) (omega, -s, 0)
///   z2(s) = (0, s, conj(omega)) (x) (0, omega, -s)
///   z3(s) = (conj(omega), 0, s) (x) (-s, 0, omega)
/// for s = +1, -1; z2 and z3 are the shift images of z1.
pub fn hakye_kernel_vectors(params: &HaKyeParams, allow_boundary: bool) -> Result<Vec<ProductVector>> {
    params.validate(allow_boundary)?;
    let omega = Complex64::from_polar(params.b.sqrt(), params.theta / 2.0);
    let oc = omega.conj();
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(6);
    for sign in [1.0f64, -1.0] {
        let s = Complex64::new(sign, 0.0);
        let e = ComplexVector::new(vec![s, oc, zero]);
        let f = ComplexVector::new(vec![omega, -s, zero]);
        out.push((e, f));
    }
    // Interleave the shifted copies to get the (z1+, z1-, z2+, z2-, ...) order.
    let shift = shift_operator();
    let mut vectors = Vec::with_capacity(6);
    for power in 0..3 {
        for (e, f) in &out {
            let mut se = e.clone();
            let mut sf = f.clone();
            for _ in 0..power {
                se = shift.matvec(&se);
                sf = shift.matvec(&sf);
            }
            vectors.push(ProductVector::from_unnormalized(&se, &sf).canonical());
        }
    }
    Ok(vectors)
}

// ---------------------------------------------------------------------------
// Expectation values and detection
// ---------------------------------------------------------------------------

/// <e,f|W|e,f>. The value is real for a Hermitian witness; the residual
/// imaginary part is discarded.
pub fn expectation(w: &Witness, pv: &ProductVector) -> Result<f64> {
    if pv.e().dim() != w.da() || pv.f().dim() != w.db() {
        return Err(Error::DimensionMismatch(format!(
            "product vector is {}x{}, witness is {}x{}",
            pv.e().dim(),
            pv.f().dim(),
            w.da(),
            w.db()
        )));
    }
    let z = pv.tensor();
    let val = w.matrix().quadratic_form(&z);
    debug_assert!(val.im.abs() <= 1e-12 * w.frobenius_norm().max(1.0));
    Ok(val.re)
}

/// Whether the witness detects the state: Tr(W rho) < 0, strictly.
pub fn detects(w: &Witness, rho: &ComplexMatrix) -> Result<bool> {
    let tol = Tolerances::default();
    if !rho.is_square() || rho.rows() != w.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, witness acts on dimension {}",
            rho.rows(),
            rho.cols(),
            w.dim()
        )));
    }
    if (rho.trace().re - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "state trace is {:.12}, expected 1",
            rho.trace().re
        )));
    }
    let min = linalg::hermitian_min_eig(rho).map_err(|_| {
        Error::InvalidState("state is not Hermitian".into())
    })?;
    if min < -tol.psd_rel * rho.frobenius_norm() {
        return Err(Error::InvalidState(format!(
            "state is not PSD (min eigenvalue {min:.3e})"
        )));
    }
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..w.dim() {
        for j in 0..w.dim() {
            tr += w.matrix()[(i, j)] * rho[(j, i)];
        }
    }
    Ok(tr.re < 0.0)
}

// ---------------------------------------------------------------------------
// Two-qubit boundary fixture
// ---------------------------------------------------------------------------

fn two_qubit_bell_pt(sign: f64) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = ComplexVector::new(vec![
        Complex64::new(s, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(sign * s, 0.0),
    ]);
    let proj = ComplexMatrix::outer(&psi, &psi);
    partial_transpose(&proj, 2, 2, Subsystem::B).unwrap()
}

/// The segment p W+ + (1-p) W- between the partial transposes of the two
/// diagonal Bell projectors on C^2 (x) C^2. Every point of the segment is
/// block-positive; the midpoint is PSD.
pub fn two_qubit_segment(p: f64) -> Result<Witness> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!(
            "segment parameter must lie in [0, 1], got {p}"
        )));
    }
    let m = two_qubit_bell_pt(1.0)
        .scale_real(p)
        .add(&two_qubit_bell_pt(-1.0).scale_real(1.0 - p));
    Witness::new(2, 2, m, format!("two-qubit-segment(p={p})"))
}

/// Projector onto (|01>+|10>)/sqrt(2), partially transposed on B.
/// Subtracting any positive multiple of this from the two-qubit segment
/// breaks block positivity, which is what makes the segment a boundary
/// fixture.
pub fn two_qubit_cross_projector_pt() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phi = ComplexVector::new(vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(0.0, 0.0),
    ]);
    let proj = ComplexMatrix::outer(&phi, &phi);
    partial_transpose(&proj, 2, 2, Subsystem::B).unwrap()
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

/// Wire format: { "dA": int, "dB": int, "label": string,
/// "matrix": [[re, im], ...] row-major }.
#[derive(Serialize, Deserialize)]
struct WitnessJson {
    #[serde(rename = "dA")]
    da: usize,
    #[serde(rename = "dB")]
    db: usize,
    label: String,
    matrix: Vec<[f64; 2]>,
}

impl Witness {
    pub fn to_json(&self) -> String {
        let dto = WitnessJson {
            da: self.da,
            db: self.db,
            label: self.label.clone(),
            matrix: self
                .matrix
                .entries()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        };
        serde_json::to_string_pretty(&dto).expect("witness serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Witness> {
        let dto: WitnessJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("witness JSON: {e}")))?;
        let n = dto.da * dto.db;
        if dto.matrix.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} entries, expected {} for dA={}, dB={}",
                dto.matrix.len(),
                n * n,
                dto.da,
                dto.db
            )));
        }
        let entries = dto
            .matrix
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let matrix = ComplexMatrix::new(n, n, entries)?;
        Witness::new(dto.da, dto.db, matrix, dto.label)
    }
}
