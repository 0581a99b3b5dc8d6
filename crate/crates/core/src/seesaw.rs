//! Minimization of <e,f|W|e,f> over product vectors.
//!
//! The workhorse is an alternating scheme: with one side fixed, the optimal
//! other side is the minimal eigenvector of the sandwiched operator, so each
//! half-step is a small Hermitian eigenproblem and the objective can only go
//! down. Random restarts guard against local minima; a coarse deterministic
//! grid search doubles as an independent oracle at desk scale.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitian_min_eig, sandwich, ComplexMatrix, ComplexVector, Subsystem};
use crate::witness::{expectation, ProductVector, Witness};

/// Restart and convergence policy for the alternating minimization.
#[derive(Debug, Clone, Copy)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when the objective changes by less than
    /// `conv_tol * max(1, |value|)` over one full iteration.
    pub conv_tol: f64,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        SeesawConfig {
            restarts: 1000,
            max_iters: 500,
            conv_tol: 1e-12,
            seed: 0,
        }
    }
}

/// Outcome of the minimization.
#[derive(Debug, Clone)]
pub struct MinResult {
    pub value: f64,
    pub argmin: ProductVector,
    /// Iterations used by the winning restart.
    pub iterations: usize,
    /// Whether the winning restart met the convergence tolerance.
    pub converged: bool,
    /// Final value of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

/// One alternating run from a fixed starting point.
#[derive(Debug, Clone)]
pub struct SeesawRun {
    pub value: f64,
    pub argmin: ProductVector,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every half-step; nonincreasing by construction.
    pub trace: Vec<f64>,
}

/// Local unit vector with i.i.d. complex Gaussian entries, i.e. uniform on
/// the sphere.
pub fn random_local_vector<R: Rng>(rng: &mut R, dim: usize) -> ComplexVector {
    loop {
        let v = ComplexVector::new(
            (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect(),
        );
        if v.norm() > 1e-6 {
            return v.normalized();
        }
    }
}

pub fn random_product_vector<R: Rng>(rng: &mut R, da: usize, db: usize) -> ProductVector {
    ProductVector::from_unnormalized(&random_local_vector(rng, da), &random_local_vector(rng, db))
}

/// Minimal eigenpair of a Hermitian matrix. Local dimensions up to 3 run on
/// the stack with the same cyclic Jacobi rotations and conventions as the
/// general solver; anything larger falls back to it. This is the inner loop
/// of every half-step, so it avoids the full-spectrum machinery.
fn min_eigenpair(h: &ComplexMatrix) -> Result<(f64, ComplexVector)> {
    const N: usize = 3;
    let n = h.rows();
    if n > N || n == 0 {
        let spec = eigh(h)?;
        return Ok((spec.min_eigenvalue(), spec.ground_vector().clone()));
    }
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut a = [[zero; N]; N];
    let mut v = [[zero; N]; N];
    let mut scale_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            a[i][j] = (h[(i, j)] + h[(j, i)].conj()).scale(0.5);
            scale_sq += a[i][j].norm_sqr();
        }
        v[i][i] = one;
    }
    let scale = scale_sq.sqrt().max(f64::MIN_POSITIVE);
    let target = 1e-15 * scale * n as f64;

    for _ in 0..40 {
        let mut off = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    off += a[p][q].norm_sqr();
                }
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag <= 1e-18 * scale {
                    a[p][q] = zero;
                    a[q][p] = zero;
                    continue;
                }
                let phi = apq / mag;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                let phi_cs = phi.scale(cs);
                let phi_sn = phi.scale(sn);
                for r in 0..n {
                    let arp = a[r][p];
                    let arq = a[r][q];
                    a[r][p] = phi_cs * arp - arq.scale(sn);
                    a[r][q] = phi_sn * arp + arq.scale(cs);
                }
                for c in 0..n {
                    let apc = a[p][c];
                    let aqc = a[q][c];
                    a[p][c] = phi_cs.conj() * apc - aqc.scale(sn);
                    a[q][c] = phi_sn.conj() * apc + aqc.scale(cs);
                }
                a[p][p] = Complex64::new(app - t * mag, 0.0);
                a[q][q] = Complex64::new(aqq + t * mag, 0.0);
                a[p][q] = zero;
                a[q][p] = zero;
                for r in 0..n {
                    let vrp = v[r][p];
                    let vrq = v[r][q];
                    v[r][p] = phi_cs * vrp - vrq.scale(sn);
                    v[r][q] = phi_sn * vrp + vrq.scale(cs);
                }
            }
        }
    }

    let mut best = 0usize;
    for k in 1..n {
        if a[k][k].re < a[best][best].re {
            best = k;
        }
    }
    // Phase convention: largest-magnitude entry real positive, ties to the
    // lowest index.
    let mut idx = 0usize;
    let mut mag = 0.0f64;
    for r in 0..n {
        let m = v[r][best].norm();
        if m > mag {
            mag = m;
            idx = r;
        }
    }
    let phase = if mag > 0.0 {
        v[idx][best].conj() / mag
    } else {
        one
    };
    Ok((
        a[best][best].re,
        ComplexVector::new((0..n).map(|r| v[r][best] * phase).collect()),
    ))
}

/// Alternate minimal-eigenvector updates from `start` until the objective
/// stalls or `max_iters` is reached.
pub fn seesaw_run(
    w: &Witness,
    start: &ProductVector,
    max_iters: usize,
    conv_tol: f64,
) -> Result<SeesawRun> {
    let mut e = start.e().clone();
    let mut f = start.f().clone();
    let mut trace = Vec::new();
    let mut prev = expectation(w, &ProductVector::from_unnormalized(&e, &f))?;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..max_iters {
        let on_a = sandwich(w.matrix(), w.da(), w.db(), Subsystem::B, &f)?;
        let (half_value, ground_e) = min_eigenpair(&on_a)?;
        e = ground_e;
        trace.push(half_value);

        let on_b = sandwich(w.matrix(), w.da(), w.db(), Subsystem::A, &e)?;
        let (value, ground_f) = min_eigenpair(&on_b)?;
        f = ground_f;
        trace.push(value);

        iterations = iter + 1;
        if (prev - value).abs() <= conv_tol * value.abs().max(1.0) {
            converged = true;
            break;
        }
        prev = value;
    }

    let argmin = ProductVector::from_unnormalized(&e, &f);
    let value = expectation(w, &argmin)?;
    Ok(SeesawRun {
        value,
        argmin,
        iterations,
        converged,
        trace,
    })
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn run_restart(w: &Witness, cfg: &SeesawConfig, restart: usize) -> Result<SeesawRun> {
    let mut rng = restart_rng(cfg.seed, restart);
    let start = random_product_vector(&mut rng, w.da(), w.db());
    seesaw_run(w, &start, cfg.max_iters, cfg.conv_tol)
}

/// Best product expectation over all restarts. Restart k draws its starting
/// point from an RNG stream derived from (seed, k), so the result depends
/// only on the witness and the configuration. Ties go to the lowest restart
/// index.
pub fn min_product_expectation(w: &Witness, cfg: &SeesawConfig) -> Result<MinResult> {
    let runs: Vec<SeesawRun> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|k| run_restart(w, cfg, k))
        .collect::<Result<_>>()?;

    let mut best = 0usize;
    for (k, run) in runs.iter().enumerate() {
        if run.value < runs[best].value {
            best = k;
        }
    }
    let restart_values = runs.iter().map(|r| r.value).collect();
    let winner = &runs[best];
    Ok(MinResult {
        value: winner.value,
        argmin: winner.argmin.clone(),
        iterations: winner.iterations,
        converged: winner.converged,
        restart_values,
    })
}

/// Feasibility-oriented variant used by the bisection in the subtraction
/// certificate: restarts run sequentially, optionally starting from a warm
/// point, and stop as soon as some value falls below `cutoff`. The boolean
/// answer (was anything below the cutoff found) is unaffected by the early
/// exit.
pub(crate) fn min_product_scan(
    w: &Witness,
    cfg: &SeesawConfig,
    warm: Option<&ProductVector>,
    cutoff: f64,
) -> Result<(f64, ProductVector)> {
    let mut best_value = f64::INFINITY;
    let mut best_pv: Option<ProductVector> = None;

    if let Some(start) = warm {
        let run = seesaw_run(w, start, cfg.max_iters, cfg.conv_tol)?;
        best_value = run.value;
        best_pv = Some(run.argmin);
    }
    if best_value >= cutoff {
        for k in 0..cfg.restarts.max(1) {
            let run = run_restart(w, cfg, k)?;
            if run.value < best_value {
                best_value = run.value;
                best_pv = Some(run.argmin);
            }
            if best_value < cutoff {
                break;
            }
        }
    }
    Ok((best_value, best_pv.expect("at least one run executed")))
}

/// An entanglement witness in the strict sense: nonnegative on all product
/// states, but with a negative eigenvalue.
pub fn is_entanglement_witness(w: &Witness, cfg: &SeesawConfig, tol: f64) -> Result<bool> {
    let min_product = min_product_expectation(w, cfg)?.value;
    if min_product < -tol {
        return Ok(false);
    }
    let min_eig = hermitian_min_eig(w.matrix())?;
    Ok(min_eig < -tol)
}

/// A fixed number of alternating updates with no early stop. Near a product
/// zero the value-based stopping rule of [`seesaw_run`] quits once the
/// objective reaches the noise floor, while the distance to the fixed point
/// is still only the square root of that; the extra iterations keep
/// contracting it down to eigensolver precision.
pub fn seesaw_polish(w: &Witness, start: &ProductVector, iters: usize) -> Result<ProductVector> {
    let mut e = start.e().clone();
    let mut f = start.f().clone();
    for _ in 0..iters {
        let on_a = sandwich(w.matrix(), w.da(), w.db(), Subsystem::B, &f)?;
        e = min_eigenpair(&on_a)?.1;
        let on_b = sandwich(w.matrix(), w.da(), w.db(), Subsystem::A, &e)?;
        f = min_eigenpair(&on_b)?.1;
    }
    Ok(ProductVector::from_unnormalized(&e, &f))
}

/// Harvest the product vectors with vanishing expectation that the restarts
/// converge to, deduplicated by fidelity clustering.
///
/// Two product vectors are identified when |<e|e'><f|f'>| >= 1 - 1e-6; the
/// representative of each cluster is the first one found (lowest restart
/// index), polished to fixed-point precision and put in canonical phase.
/// Fails with `NotBlockPositive` when any restart finds a value below
/// `-zero_tol`.
pub fn collect_zeros(
    w: &Witness,
    cfg: &SeesawConfig,
    zero_tol: f64,
) -> Result<Vec<ProductVector>> {
    let runs: Vec<SeesawRun> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|k| run_restart(w, cfg, k))
        .collect::<Result<_>>()?;
    if let Some(worst) = runs
        .iter()
        .map(|r| r.value)
        .min_by(|a, b| a.partial_cmp(b).unwrap())
    {
        if worst < -zero_tol {
            return Err(Error::NotBlockPositive { min_value: worst });
        }
    }

    let gap = Tolerances::default().cluster_fidelity_gap;
    let mut reps: Vec<ProductVector> = Vec::new();
    for run in &runs {
        if !run.converged || run.value.abs() > zero_tol {
            continue;
        }
        let polished = seesaw_polish(w, &run.argmin, 50)?;
        if expectation(w, &polished)?.abs() > zero_tol {
            continue;
        }
        let candidate = polished.canonical();
        if reps.iter().all(|r| r.fidelity(&candidate) < 1.0 - gap) {
            reps.push(candidate);
        }
    }
    Ok(reps)
}

/// Deterministic coarse minimum over a product-state grid, polished by
/// short alternating runs from the best grid cells. Only desk-scale
/// dimensions (3x3 and 2x2) are supported.
///
/// For each gridded |e> the exact optimal |f> is the minimal eigenvector of
/// the sandwiched operator, so only one side needs to be gridded: 4 angles
/// for C^3, 2 for C^2, `resolution` points each.
pub fn grid_oracle_min(w: &Witness, resolution: usize) -> Result<f64> {
    if !((w.da() == 3 && w.db() == 3) || (w.da() == 2 && w.db() == 2)) {
        return Err(Error::UnsupportedDimension {
            da: w.da(),
            db: w.db(),
        });
    }
    let res = resolution.max(2);
    let mut candidates: Vec<(f64, ComplexVector)> = Vec::new();

    let consider = |e: ComplexVector, acc: &mut Vec<(f64, ComplexVector)>| -> Result<()> {
        let m = sandwich(w.matrix(), w.da(), w.db(), Subsystem::A, &e)?;
        let value = min_eigenpair(&m)?.0;
        acc.push((value, e));
        Ok(())
    };

    let half_pi = std::f64::consts::FRAC_PI_2;
    let two_pi = std::f64::consts::TAU;
    let amp = |k: usize| k as f64 * half_pi / (res - 1) as f64;
    let ang = |k: usize| k as f64 * two_pi / res as f64;

    if w.da() == 2 {
        for ia in 0..res {
            let (sa, ca) = amp(ia).sin_cos();
            for ip in 0..res {
                let e = ComplexVector::new(vec![
                    Complex64::new(ca, 0.0),
                    Complex64::from_polar(sa, ang(ip)),
                ]);
                consider(e, &mut candidates)?;
            }
        }
    } else {
        for ia in 0..res {
            let (sa, ca) = amp(ia).sin_cos();
            for ib in 0..res {
                let (sb, cb) = amp(ib).sin_cos();
                for ip in 0..res {
                    for iq in 0..res {
                        let e = ComplexVector::new(vec![
                            Complex64::new(ca, 0.0),
                            Complex64::from_polar(sa * cb, ang(ip)),
                            Complex64::from_polar(sa * sb, ang(iq)),
                        ]);
                        consider(e, &mut candidates)?;
                    }
                }
            }
        }
    }

    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut best = candidates[0].0;
    for (_, e) in candidates.iter().take(5) {
        let m = sandwich(w.matrix(), w.da(), w.db(), Subsystem::A, e)?;
        let f = min_eigenpair(&m)?.1;
        let start = ProductVector::from_unnormalized(e, &f);
        let polished = seesaw_run(w, &start, 500, 1e-14)?;
        if polished.value < best {
            best = polished.value;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::witness::{
        hakye_kernel_vectors, hakye_p_operator, hakye_witness, two_qubit_cross_projector_pt,
        two_qubit_segment, HaKyeParams,
    };

    fn cfg(restarts: usize, seed: u64) -> SeesawConfig {
        SeesawConfig {
            restarts,
            seed,
            ..SeesawConfig::default()
        }
    }

    #[test]
    fn constant_objective_on_identity() {
        let id = Witness::new(3, 3, ComplexMatrix::identity(9), "identity").unwrap();
        let r = min_product_expectation(&id, &cfg(5, 1)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finds_the_kernel_of_the_family_witness() {
        let p = HaKyeParams::new(std::f64::consts::FRAC_PI_6, 2.0);
        let w = hakye_witness(&p, false).unwrap();
        let r = min_product_expectation(&w, &cfg(60, 7)).unwrap();
        assert!(r.value.abs() <= 1e-9, "min {:.3e}", r.value);
        // The argmin should coincide with one of the known zeros up to phases.
        let zeros = hakye_kernel_vectors(&p, false).unwrap();
        let best = zeros
            .iter()
            .map(|z| z.fidelity(&r.argmin))
            .fold(0.0, f64::max);
        assert!(best > 1.0 - 1e-6, "best fidelity {best}");
    }

    #[test]
    fn detects_broken_block_positivity_of_poked_segment() {
        let w = two_qubit_segment(0.5).unwrap();
        let poked = w
            .with_matrix(
                w.matrix()
                    .sub(&two_qubit_cross_projector_pt().scale_real(1e-2)),
                "poked segment",
            )
            .unwrap();
        let r = min_product_expectation(&poked, &cfg(40, 11)).unwrap();
        assert!(r.value < 0.0, "expected a negative value, got {:.3e}", r.value);
    }

    #[test]
    fn objective_is_monotone_within_a_run() {
        let p = HaKyeParams::new(0.7, 0.5);
        let w = hakye_witness(&p, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let start = random_product_vector(&mut rng, 3, 3);
            let run = seesaw_run(&w, &start, 200, 1e-12).unwrap();
            for pair in run.trace.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-13, "not monotone: {pair:?}");
            }
        }
    }

    #[test]
    fn min_product_bounded_below_by_min_eigenvalue() {
        for (label, w) in [
            (
                "hakye",
                hakye_witness(&HaKyeParams::new(0.9, 2.2), false).unwrap(),
            ),
            ("segment", two_qubit_segment(0.1).unwrap()),
        ] {
            let r = min_product_expectation(&w, &cfg(30, 13)).unwrap();
            let floor = hermitian_min_eig(w.matrix()).unwrap();
            assert!(r.value >= floor - 1e-12, "{label}");
        }
    }

    #[test]
    fn reproducible_for_fixed_seed() {
        let w = hakye_witness(&HaKyeParams::new(0.4, 1.6), false).unwrap();
        let a = min_product_expectation(&w, &cfg(25, 99)).unwrap();
        let b = min_product_expectation(&w, &cfg(25, 99)).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.restart_values, b.restart_values);
        assert_eq!(a.argmin.tensor().entries(), b.argmin.tensor().entries());
    }

    #[test]
    fn is_entanglement_witness_examples() {
        let seesaw = cfg(60, 17);
        let p = HaKyeParams::new(std::f64::consts::FRAC_PI_6, 2.0);
        let w = hakye_witness(&p, false).unwrap();
        assert!(is_entanglement_witness(&w, &seesaw, 1e-9).unwrap());

        let id = Witness::new(3, 3, ComplexMatrix::identity(9), "identity").unwrap();
        assert!(!is_entanglement_witness(&id, &seesaw, 1e-9).unwrap());

        // Subtracting 2 P1 breaks block positivity: <01|W - 2 P1|01> = b - 2 b^2.
        let broken = w
            .with_matrix(
                w.matrix().sub(&hakye_p_operator(1, p.b).scale_real(2.0)),
                "over-subtracted",
            )
            .unwrap();
        assert!(!is_entanglement_witness(&broken, &seesaw, 1e-9).unwrap());
    }

    #[test]
    fn collect_zeros_recovers_the_six_kernel_vectors() {
        let p = HaKyeParams::new(std::f64::consts::FRAC_PI_6, 2.0);
        let w = hakye_witness(&p, false).unwrap();
        let zero_tol = 1e-9 * w.frobenius_norm();
        let found = collect_zeros(&w, &cfg(300, 23), zero_tol).unwrap();
        assert!(found.len() >= 6, "found {} clusters", found.len());
        let known = hakye_kernel_vectors(&p, false).unwrap();
        for z in &known {
            let hit = found.iter().any(|c| c.fidelity(z) > 1.0 - 1e-6);
            assert!(hit, "missing kernel vector");
        }
        // And each cluster is one of the six.
        for c in &found {
            let hit = known.iter().any(|z| c.fidelity(z) > 1.0 - 1e-5);
            assert!(hit, "spurious cluster");
        }
    }

    #[test]
    fn collect_zeros_empty_for_identity_and_deterministic() {
        let id = Witness::new(3, 3, ComplexMatrix::identity(9), "identity").unwrap();
        let found = collect_zeros(&id, &cfg(20, 29), 1e-9).unwrap();
        assert!(found.is_empty());

        let w = hakye_witness(&HaKyeParams::new(0.5, 0.7), false).unwrap();
        let tol = 1e-9 * w.frobenius_norm();
        let a = collect_zeros(&w, &cfg(60, 31), tol).unwrap();
        let b = collect_zeros(&w, &cfg(60, 31), tol).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.tensor().entries(), y.tensor().entries());
        }
    }

    #[test]
    fn collect_zeros_rejects_non_block_positive_input() {
        let w = hakye_witness(&HaKyeParams::new(0.5, 2.0), false).unwrap();
        let broken = w
            .with_matrix(
                w.matrix().sub(&hakye_p_operator(1, 2.0).scale_real(2.0)),
                "broken",
            )
            .unwrap();
        assert!(matches!(
            collect_zeros(&broken, &cfg(40, 37), 1e-9),
            Err(Error::NotBlockPositive { .. })
        ));
    }

    #[test]
    fn grid_oracle_examples() {
        let id = Witness::new(3, 3, ComplexMatrix::identity(9), "identity").unwrap();
        assert!((grid_oracle_min(&id, 6).unwrap() - 1.0).abs() < 1e-9);

        let end = two_qubit_segment(0.0).unwrap();
        assert!(grid_oracle_min(&end, 12).unwrap().abs() < 1e-6);

        let w = hakye_witness(&HaKyeParams::new(std::f64::consts::FRAC_PI_6, 2.0), false).unwrap();
        let oracle = grid_oracle_min(&w, 12).unwrap();
        let seesaw = min_product_expectation(&w, &cfg(60, 41)).unwrap().value;
        assert!((oracle - seesaw).abs() < 1e-3);

        let odd = Witness::new(2, 3, ComplexMatrix::identity(6), "odd").unwrap();
        assert!(matches!(
            grid_oracle_min(&odd, 6),
            Err(Error::UnsupportedDimension { .. })
        ));
    }
}
