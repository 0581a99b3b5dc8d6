//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).
//! Everything runs at desk scale (9x9 and 4x4 operators).

use ewopt::error::Error;
use ewopt::experiments::{run_sweep, SweepSpec};
use ewopt::linalg::{eigh, is_psd, kron, ComplexMatrix};
use ewopt::optimality::{
    build_frame, hakye_a2_analytic, hakye_analytic_frame, nonoptimality_sufficient,
    second_order_form, second_order_form_fd, subtraction_certificate_with_tol, Verdict,
};
use ewopt::seesaw::{
    grid_oracle_min, min_product_expectation, random_product_vector, seesaw_run, SeesawConfig,
};
use ewopt::spa::{ccnr_check, ppt_check, spa_witness};
use ewopt::witness::{
    expectation, hakye_kernel_vectors, hakye_p_operator, hakye_witness, shift_operator,
    two_qubit_cross_projector_pt, two_qubit_segment, HaKyeParams,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PI_6: f64 = std::f64::consts::FRAC_PI_6;

fn criterion(n: usize, description: &str, ok: bool, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {n}: {description} ({detail})");
    assert!(ok, "criterion {n} failed: {description} ({detail})");
}

fn random_strict_params(rng: &mut ChaCha8Rng) -> HaKyeParams {
    let theta = loop {
        let t: f64 = rng.gen_range(-1.0..1.0);
        if t.abs() > 0.05 {
            break t;
        }
    };
    let b = loop {
        let b: f64 = rng.gen_range(0.2..2.8);
        if (b - 1.0).abs() > 0.05 {
            break b;
        }
    };
    HaKyeParams::new(theta, b)
}

#[test]
fn criterion_01_kernel_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = random_strict_params(&mut rng);
        let w = hakye_witness(&p, false).unwrap();
        let zeros = hakye_kernel_vectors(&p, false).unwrap();
        assert_eq!(zeros.len(), 6);
        for z in &zeros {
            worst = worst.max(expectation(&w, z).unwrap().abs());
        }
    }
    criterion(
        1,
        "all six kernel vectors annihilate the witness for 20 random (theta, b)",
        worst <= 1e-12,
        format!("max |<z|W|z>| = {worst:.3e} <= 1e-12"),
    );
}

#[test]
fn criterion_02_spectral_structure() {
    let mut ok = true;
    let mut detail = String::new();
    for &b in &[0.3, 0.7, 1.8, 2.6] {
        for k in 1..=10 {
            for sign in [1.0, -1.0] {
                let theta = sign * 0.1 * k as f64;
                let w = hakye_witness(&HaKyeParams::new(theta, b), false).unwrap();
                let spec = eigh(w.matrix()).unwrap();
                let negatives = spec.eigenvalues.iter().filter(|&&x| x < -1e-10).count();
                if negatives != 1 {
                    ok = false;
                    detail = format!("{negatives} negative eigenvalues at theta={theta}, b={b}");
                }
            }
        }
        let w0 = hakye_witness(&HaKyeParams::new(0.0, b), true).unwrap();
        if !is_psd(w0.matrix(), 1e-10).unwrap() {
            ok = false;
            detail = format!("W(0, {b}) not PSD");
        }
    }
    if ok {
        detail = "exactly one eigenvalue < -1e-10 off the axis, PSD on it".into();
    }
    criterion(2, "spectral structure across the parameter range", ok, detail);
}

#[test]
fn criterion_03_shift_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let s = shift_operator();
    let ss = kron(&s, &s);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let p = random_strict_params(&mut rng);
        let w = hakye_witness(&p, false).unwrap();
        let conj = ss.matmul(w.matrix()).matmul(&ss.adjoint());
        worst = worst.max(conj.sub(w.matrix()).max_abs());
    }
    criterion(
        3,
        "witness is invariant under the doubled cyclic shift",
        worst <= 1e-14,
        format!("max deviation {worst:.3e} <= 1e-14"),
    );
}

#[test]
fn criterion_04_second_order_form_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst_analytic = 0.0f64;
    let mut worst_fd = 0.0f64;
    let mut worst_base = 0.0f64;
    for _ in 0..20 {
        let p = random_strict_params(&mut rng);
        let w = hakye_witness(&p, false).unwrap();
        // Exact assembly vs the closed form, on the frames it is stated in.
        for sign in [1.0, -1.0] {
            let frame = hakye_analytic_frame(&p, sign).unwrap();
            let exact = second_order_form(&w, &frame).unwrap();
            let analytic = hakye_a2_analytic(&p, sign).unwrap();
            worst_analytic = worst_analytic.max(exact.max_abs_diff(&analytic));
        }
        // Exact assembly vs the finite-difference Hessian on all six zeros,
        // plus explicit vanishing of the constant and linear terms.
        for z in hakye_kernel_vectors(&p, false).unwrap() {
            worst_base = worst_base.max(expectation(&w, &z).unwrap().abs());
            let frame = build_frame(&z);
            let exact = second_order_form(&w, &frame).unwrap();
            let fd = second_order_form_fd(&w, &frame, 1e-4).unwrap();
            worst_fd = worst_fd.max(exact.max_abs_diff(&fd));
            // First-order terms: <e_i f0|W|e0 f0> and <e0 f_j|W|e0 f0>.
            let base = z.tensor();
            let wbase = w.matrix().matvec(&base);
            for ei in frame.e_perp() {
                worst_base = worst_base.max(ei.tensor(frame.f0()).inner(&wbase).norm());
            }
            for fj in frame.f_perp() {
                worst_base = worst_base.max(frame.e0().tensor(fj).inner(&wbase).norm());
            }
        }
    }
    let ok = worst_analytic <= 1e-10 && worst_fd <= 1e-6 && worst_base <= 1e-10;
    criterion(
        4,
        "second-order form matches closed form and finite differences; lower orders vanish",
        ok,
        format!(
            "|exact-analytic| = {worst_analytic:.3e} <= 1e-10, |exact-fd| = {worst_fd:.3e} <= 1e-6, |A0/A1| = {worst_base:.3e} <= 1e-10"
        ),
    );
}

#[test]
fn criterion_05_nonoptimality_gap_and_verdict() {
    // Reference point: gap 5/6 certified to 1e-9.
    let p = HaKyeParams::new(PI_6, 2.0);
    let w = hakye_witness(&p, false).unwrap();
    let zeros = hakye_kernel_vectors(&p, false).unwrap();
    let report = nonoptimality_sufficient(&w, &zeros, 1e-7 * w.frobenius_norm()).unwrap();
    let gap_ok = matches!(report.verdict, Verdict::NotOptimal { .. })
        && (report.min_gap - 5.0 / 6.0).abs() <= 1e-9
        && report.span_dim == 6;

    // Verdict across a 10x10 grid.
    let thetas: Vec<f64> = (0..10).map(|k| -0.95 + 0.2 * k as f64).collect();
    let bs: Vec<f64> = (0..10).map(|k| 0.3 + 0.26 * k as f64).collect();
    let mut grid_ok = true;
    let mut detail = String::new();
    for &theta in &thetas {
        for &b in &bs {
            let p = HaKyeParams::new(theta, b);
            let w = hakye_witness(&p, false).unwrap();
            let zeros = hakye_kernel_vectors(&p, false).unwrap();
            let report =
                nonoptimality_sufficient(&w, &zeros, 1e-7 * w.frobenius_norm()).unwrap();
            let cell_ok =
                matches!(report.verdict, Verdict::NotOptimal { .. }) && report.span_dim == 6;
            if !cell_ok {
                grid_ok = false;
                detail = format!(
                    "cell (theta={theta}, b={b}): verdict {:?}, span {}",
                    report.verdict, report.span_dim
                );
            }
        }
    }
    if grid_ok {
        detail = format!(
            "min_gap(pi/6, 2) = {:.12} within 1e-9 of 5/6; NotOptimal with span 6 on all 100 cells",
            report.min_gap
        );
    }
    criterion(5, "nonoptimality gap and verdict", gap_ok && grid_ok, detail);
}

#[test]
fn criterion_06_subtraction_certificate_surface() {
    // Closed-form check at theta = 0, b = 2: the whole block is removable.
    let p = HaKyeParams::new(0.0, 2.0);
    let w = hakye_witness(&p, true).unwrap();
    let zeros = hakye_kernel_vectors(&p, true).unwrap();
    let cfg = SeesawConfig {
        restarts: 200,
        seed: 206,
        ..SeesawConfig::default()
    };
    let lambda_ref =
        subtraction_certificate_with_tol(&w, &hakye_p_operator(1, 2.0), &zeros, &cfg, 1e-4)
            .unwrap();
    let ref_ok = (lambda_ref - 5.0 / 21.0).abs() <= 0.01;

    // Sweep a grid containing the theta = 0 column: positivity everywhere,
    // row maximum on that column.
    let spec = SweepSpec {
        theta_min: -0.3,
        theta_max: 0.3,
        theta_step: 0.1,
        b_min: 0.45,
        b_max: 2.46,
        b_step: 0.67,
        restarts: 200,
        seed: 6,
        lambda_tol: 1e-4,
    };
    let cells = run_sweep(&spec).unwrap();
    assert_eq!(cells.len(), spec.theta_values().len() * spec.b_values().len());
    let mut ok = ref_ok;
    let mut detail = if ref_ok {
        format!("lambda(0, 2) = {lambda_ref:.6} within 0.01 of {:.6}", 5.0 / 21.0)
    } else {
        format!("lambda(0, 2) = {lambda_ref:.6}, expected {:.6} +- 0.01", 5.0 / 21.0)
    };
    for &b in &spec.b_values() {
        let row: Vec<&_> = cells.iter().filter(|c| c.b == b).collect();
        let at_zero = row.iter().find(|c| c.theta == 0.0).expect("grid contains theta = 0");
        for cell in &row {
            if !cell.converged || cell.lambda_max <= 0.0 {
                ok = false;
                detail = format!("cell (theta={}, b={b}) not positive/converged", cell.theta);
            }
            if cell.lambda_max > at_zero.lambda_max + 1e-3 {
                ok = false;
                detail = format!(
                    "row b={b}: lambda({}, b) = {} exceeds lambda(0, b) = {}",
                    cell.theta, cell.lambda_max, at_zero.lambda_max
                );
            }
        }
    }
    if ok && ref_ok {
        detail.push_str("; all cells positive, row maxima at theta = 0");
    }
    criterion(6, "subtraction certificate surface", ok, detail);
}

#[test]
fn criterion_07_seesaw_against_grid_oracle() {
    let fixtures: Vec<(&str, ewopt::Witness)> = vec![
        ("family(pi/6, 2)", hakye_witness(&HaKyeParams::new(PI_6, 2.0), false).unwrap()),
        ("family(0, 2)", hakye_witness(&HaKyeParams::new(0.0, 2.0), true).unwrap()),
        ("segment(0)", two_qubit_segment(0.0).unwrap()),
        ("segment(1/2)", two_qubit_segment(0.5).unwrap()),
    ];
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut detail = String::new();
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for (name, w) in &fixtures {
        let cfg = SeesawConfig {
            restarts: 200,
            seed: 207,
            ..SeesawConfig::default()
        };
        let seesaw = min_product_expectation(w, &cfg).unwrap();
        let oracle = grid_oracle_min(w, 12).unwrap();
        let diff = (seesaw.value - oracle).abs();
        worst = worst.max(diff);
        if diff > 1e-3 {
            ok = false;
            detail = format!("{name}: see-saw {} vs oracle {oracle}", seesaw.value);
        }
        // Monotone objective inside each run.
        for _ in 0..25 {
            let start = random_product_vector(&mut rng, w.da(), w.db());
            let run = seesaw_run(w, &start, 300, 1e-12).unwrap();
            for pair in run.trace.windows(2) {
                if pair[1] > pair[0] + 1e-13 {
                    ok = false;
                    detail = format!("{name}: objective increased {} -> {}", pair[0], pair[1]);
                }
            }
        }
    }
    if ok {
        detail = format!("max |see-saw - oracle| = {worst:.3e} <= 1e-3; traces nonincreasing");
    }
    criterion(7, "see-saw agrees with the grid oracle and is monotone", ok, detail);
}

#[test]
fn criterion_08_two_qubit_boundary_fixture() {
    let mut ok = true;
    let mut detail = String::new();
    for &p in &[0.2, 0.5] {
        for &eps in &[1e-3, 1e-2] {
            let w = two_qubit_segment(p).unwrap();
            let poked = w
                .with_matrix(
                    w.matrix().sub(&two_qubit_cross_projector_pt().scale_real(eps)),
                    "poked",
                )
                .unwrap();
            let cfg = SeesawConfig {
                restarts: 150,
                seed: 208,
                ..SeesawConfig::default()
            };
            let value = min_product_expectation(&poked, &cfg).unwrap().value;
            if value >= 0.0 {
                ok = false;
                detail = format!("p={p}, eps={eps}: min product {value:.3e} not negative");
            }
        }
    }
    let mid_psd = is_psd(two_qubit_segment(0.5).unwrap().matrix(), 1e-10).unwrap();
    if !mid_psd {
        ok = false;
        detail = "segment midpoint not PSD".into();
    }
    if ok {
        detail = "every poked segment goes negative on products; midpoint PSD".into();
    }
    criterion(8, "two-qubit boundary fixture", ok, detail);
}

#[test]
fn criterion_09_spa() {
    let w = hakye_witness(&HaKyeParams::new(PI_6, 2.0), false).unwrap();
    let spa = spa_witness(&w).unwrap();
    let expect = 1.0 / (1.0 + 9.0 * (3.0f64.sqrt() - 1.0));
    let p_ok = (spa.p_star - expect).abs() <= 1e-6 && (spa.p_star - 0.131779).abs() <= 1e-6;
    let min_state = eigh(&spa.state).unwrap().eigenvalues[0];
    let trace = spa.state.trace().re;
    let state_ok = (-1e-12..=1e-9).contains(&min_state) && (trace - 1.0).abs() <= 1e-12;
    let ppt = ppt_check(&spa.state, 3, 3).unwrap();
    let ccnr = ccnr_check(&spa.state, 3, 3).unwrap();
    let records_ok = ppt.min_eig_pt.is_finite() && ccnr.realignment_trace_norm.is_finite();
    criterion(
        9,
        "SPA weight, state positivity, and necessary-criterion records",
        p_ok && state_ok && records_ok,
        format!(
            "p* = {:.9} (target {expect:.9}), state min eig = {min_state:.3e}, trace - 1 = {:.3e}, ppt: min eig {:.6e} (npt = {}), ccnr: trace norm {:.6} (flag = {})",
            spa.p_star,
            trace - 1.0,
            ppt.min_eig_pt,
            ppt.is_npt,
            ccnr.realignment_trace_norm,
            ccnr.flags_entangled
        ),
    );
}

#[test]
fn criterion_10_sweep_determinism() {
    // Two CLI runs of `sweep --fast` with the same seed must produce
    // byte-identical CSV files.
    let dir = std::env::temp_dir().join(format!("ewopt-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = |name: &str| dir.join(name);
    let run = |path: &std::path::Path| {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_ewopt"))
            .args(["sweep", "--fast", "-o"])
            .arg(path)
            .env("EWOPT_SEED", "42")
            .status()
            .expect("failed to launch the CLI");
        assert!(status.success(), "sweep exited with {status}");
    };
    run(&out("a.csv"));
    run(&out("b.csv"));
    let a = std::fs::read(out("a.csv")).unwrap();
    let b = std::fs::read(out("b.csv")).unwrap();
    let rows = a.iter().filter(|&&c| c == b'\n').count() - 1;
    criterion(
        10,
        "fast sweep is byte-identical across runs",
        a == b,
        format!("{rows} rows, {} bytes, identical = {}", a.len(), a == b),
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn acceptance_error_paths() {
    // Representative error paths exercised at the acceptance surface.
    let p = HaKyeParams::new(0.4, 2.0);
    let w = hakye_witness(&p, false).unwrap();
    assert!(matches!(
        nonoptimality_sufficient(&w, &[], 1e-7),
        Err(Error::EmptyZeroSet)
    ));
    assert!(hakye_witness(&HaKyeParams::new(0.0, 2.0), false).is_err());
    assert!(matches!(
        grid_oracle_min(
            &ewopt::Witness::new(2, 3, ComplexMatrix::identity(6), "odd").unwrap(),
            6
        ),
        Err(Error::UnsupportedDimension { .. })
    ));
}
