//! Grid sweeps, file formats and the machinery behind the CLI verbs.
//!
//! The sweep maps the largest subtractable weight of the first rank-one
//! block over a (theta, b) grid of the family witness. Cells are independent
//! work items executed in parallel; each derives its own RNG seed from the
//! grid position, and rows are emitted in grid order with fixed float
//! formatting, so the output is byte-identical across runs for a fixed spec.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexVector;
use crate::optimality::{
    nonoptimality_sufficient, subtraction_certificate_with_tol, OptimalityReport, Verdict,
};
use crate::seesaw::{collect_zeros, SeesawConfig};
use crate::spa::{ccnr_check, ppt_check, spa_witness, CcnrRecord, PptRecord};
use crate::witness::{
    hakye_kernel_vectors, hakye_p_operator, hakye_witness, HaKyeParams, ProductVector, Witness,
};

const FRAC_PI_3: f64 = std::f64::consts::FRAC_PI_3;

// ---------------------------------------------------------------------------
// Sweep specification
// ---------------------------------------------------------------------------

/// Grid and budget for the lambda_max surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_step: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub b_step: f64,
    pub restarts: usize,
    pub seed: u64,
    pub lambda_tol: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            theta_min: -FRAC_PI_3,
            theta_max: FRAC_PI_3,
            theta_step: 0.05,
            b_min: 0.05,
            b_max: 3.0,
            b_step: 0.1,
            restarts: 1000,
            seed: 0,
            lambda_tol: 1e-4,
        }
    }
}

impl SweepSpec {
    /// Reduced grid for quick runs: coarser steps, fewer restarts.
    pub fn fast() -> Self {
        SweepSpec {
            theta_step: 0.1,
            b_step: 0.2,
            restarts: 200,
            ..SweepSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, step) in [("theta_step", self.theta_step), ("b_step", self.b_step)] {
            if !(step > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {step}")));
            }
        }
        if self.theta_max < self.theta_min || self.b_max < self.b_min {
            return Err(Error::InvalidParams("empty grid range".into()));
        }
        if self.theta_min < -FRAC_PI_3 - 1e-12 || self.theta_max > FRAC_PI_3 + 1e-12 {
            return Err(Error::InvalidParams(
                "theta range must stay within [-pi/3, pi/3]".into(),
            ));
        }
        if !(self.b_min > 0.0) {
            return Err(Error::InvalidParams(format!(
                "b grid must be positive, starts at {}",
                self.b_min
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParams("restarts must be at least 1".into()));
        }
        if !(self.lambda_tol > 0.0) {
            return Err(Error::InvalidParams("lambda_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn theta_values(&self) -> Vec<f64> {
        grid_values(self.theta_min, self.theta_max, self.theta_step)
    }

    pub fn b_values(&self) -> Vec<f64> {
        grid_values(self.b_min, self.b_max, self.b_step)
    }
}

fn grid_values(min: f64, max: f64, step: f64) -> Vec<f64> {
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|k| {
            let v = min + k as f64 * step;
            // Snap the values the grid semantics care about.
            if v.abs() < 1e-12 {
                0.0
            } else if (v - FRAC_PI_3).abs() < 1e-12 {
                FRAC_PI_3
            } else if (v + FRAC_PI_3).abs() < 1e-12 {
                -FRAC_PI_3
            } else {
                v
            }
        })
        .collect()
}

/// One grid cell of the sweep. `converged` is false for cells that were
/// skipped (b too close to 1 away from theta = 0) or where the certificate
/// could not be established.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub theta: f64,
    pub b: f64,
    pub lambda_max: f64,
    pub converged: bool,
}

/// SplitMix64 finalizer; decorrelates the per-cell seeds.
fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn cell_seed(seed: u64, i: usize, j: usize) -> u64 {
    mix64(seed ^ mix64(((i as u64) << 32) | (j as u64 & 0xFFFF_FFFF)))
}

/// Run the sweep: one subtraction certificate per grid cell, subtracting the
/// first rank-one block of the family witness. Cells run in parallel but the
/// output order is the grid order (theta outer, b inner).
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepCell>> {
    spec.validate()?;
    let thetas = spec.theta_values();
    let bs = spec.b_values();
    let mut jobs = Vec::with_capacity(thetas.len() * bs.len());
    for (i, &theta) in thetas.iter().enumerate() {
        for (j, &b) in bs.iter().enumerate() {
            jobs.push((i, j, theta, b));
        }
    }
    jobs.into_par_iter()
        .map(|(i, j, theta, b)| sweep_cell(spec, i, j, theta, b))
        .collect()
}

fn sweep_cell(spec: &SweepSpec, i: usize, j: usize, theta: f64, b: f64) -> Result<SweepCell> {
    // Cells with b at the excluded family value are emitted unconverged
    // (rather than omitted, to keep the output rectangular), except at
    // theta = 0 where the PSD boundary operator is fine.
    if (b - 1.0).abs() < 1e-9 && theta != 0.0 {
        return Ok(SweepCell {
            theta,
            b,
            lambda_max: 0.0,
            converged: false,
        });
    }
    let params = HaKyeParams::new(theta, b);
    let witness = hakye_witness(&params, true)?;
    let zeros = hakye_kernel_vectors(&params, true)?;
    let cfg = SeesawConfig {
        restarts: spec.restarts,
        seed: cell_seed(spec.seed, i, j),
        ..SeesawConfig::default()
    };
    match subtraction_certificate_with_tol(
        &witness,
        &hakye_p_operator(1, b),
        &zeros,
        &cfg,
        spec.lambda_tol,
    ) {
        Ok(lambda_max) => Ok(SweepCell {
            theta,
            b,
            lambda_max,
            converged: true,
        }),
        Err(Error::NotBlockPositive { .. }) => Ok(SweepCell {
            theta,
            b,
            lambda_max: 0.0,
            converged: false,
        }),
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// 17 significant digits: enough to reproduce any f64 exactly on read-back.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sweep_to_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("theta,b,lambda_max,converged\n");
    for cell in cells {
        out.push_str(&fmt_f64(cell.theta));
        out.push(',');
        out.push_str(&fmt_f64(cell.b));
        out.push(',');
        out.push_str(&fmt_f64(cell.lambda_max));
        out.push(',');
        out.push_str(if cell.converged { "true" } else { "false" });
        out.push('\n');
    }
    out
}

pub fn sweep_from_csv(text: &str) -> Result<Vec<SweepCell>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("theta,b,lambda_max,converged") => {}
        other => {
            return Err(Error::Parse(format!(
                "unexpected CSV header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut cells = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "line {}: expected 4 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
        };
        cells.push(SweepCell {
            theta: parse(fields[0])?,
            b: parse(fields[1])?,
            lambda_max: parse(fields[2])?,
            converged: match fields[3] {
                "true" => true,
                "false" => false,
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: bad converged flag {other:?}",
                        lineno + 2
                    )))
                }
            },
        });
    }
    Ok(cells)
}

/// Run the sweep and write the CSV file.
pub fn cmd_sweep(spec: &SweepSpec, out_path: &Path) -> Result<Vec<SweepCell>> {
    let cells = run_sweep(spec)?;
    fs::write(out_path, sweep_to_csv(&cells))?;
    Ok(cells)
}

// ---------------------------------------------------------------------------
// Witness and zero-set files
// ---------------------------------------------------------------------------

pub fn read_witness(path: &Path) -> Result<Witness> {
    let text = fs::read_to_string(path)?;
    Witness::from_json(&text)
}

pub fn write_witness(w: &Witness, path: &Path) -> Result<()> {
    fs::write(path, w.to_json())?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ProductVectorJson {
    e: Vec<[f64; 2]>,
    f: Vec<[f64; 2]>,
}

fn vector_to_pairs(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.entries().iter().map(|z| [z.re, z.im]).collect()
}

fn pairs_to_vector(pairs: &[[f64; 2]]) -> ComplexVector {
    ComplexVector::new(pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
}

pub fn zeros_to_json(zeros: &[ProductVector]) -> String {
    let dto: Vec<ProductVectorJson> = zeros
        .iter()
        .map(|z| ProductVectorJson {
            e: vector_to_pairs(z.e()),
            f: vector_to_pairs(z.f()),
        })
        .collect();
    serde_json::to_string_pretty(&dto).expect("zero-set serialization cannot fail")
}

pub fn zeros_from_json(text: &str) -> Result<Vec<ProductVector>> {
    let dto: Vec<ProductVectorJson> =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("zero-set JSON: {e}")))?;
    dto.iter()
        .map(|z| ProductVector::new(pairs_to_vector(&z.e), pairs_to_vector(&z.f)))
        .collect()
}

pub fn read_zeros(path: &Path) -> Result<Vec<ProductVector>> {
    zeros_from_json(&fs::read_to_string(path)?)
}

pub fn write_zeros(zeros: &[ProductVector], path: &Path) -> Result<()> {
    fs::write(path, zeros_to_json(zeros))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// JSON form of the optimality check.
#[derive(Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: String,
    pub reason: Option<String>,
    pub span_dim: usize,
    pub per_zero_min_eig: Vec<f64>,
    pub min_gap: f64,
    pub zero_count: usize,
    /// True when the zero set was discovered by random restarts rather than
    /// supplied; the verdict is then conditional on that set being complete.
    pub heuristic_zeros: bool,
    pub caveat: Option<String>,
}

impl CheckReport {
    pub fn from_report(report: &OptimalityReport, zero_count: usize, heuristic: bool) -> Self {
        let (verdict, reason) = match &report.verdict {
            Verdict::NotOptimal { .. } => ("NotOptimal".to_string(), None),
            Verdict::Inconclusive { reason } => ("Inconclusive".to_string(), Some(reason.clone())),
        };
        CheckReport {
            verdict,
            reason,
            span_dim: report.span_dim,
            per_zero_min_eig: report.per_zero_min_eig.clone(),
            min_gap: report.min_gap,
            zero_count,
            heuristic_zeros: heuristic,
            caveat: heuristic.then(|| {
                "zero set was discovered heuristically; the verdict is conditional on its completeness"
                    .to_string()
            }),
        }
    }
}

/// Optimality check behind the CLI: zeros either supplied or discovered.
pub fn cmd_check_optimality(
    witness: &Witness,
    supplied_zeros: Option<Vec<ProductVector>>,
    cfg: &SeesawConfig,
    verdict_tol: f64,
) -> Result<CheckReport> {
    let (zeros, heuristic) = match supplied_zeros {
        Some(z) => (z, false),
        None => {
            let zero_tol = crate::config::Tolerances::default().zero_value_rel
                * witness.frobenius_norm();
            (collect_zeros(witness, cfg, zero_tol)?, true)
        }
    };
    if zeros.is_empty() {
        return Err(Error::EmptyZeroSet);
    }
    let report = nonoptimality_sufficient(witness, &zeros, verdict_tol)?;
    Ok(CheckReport::from_report(&report, zeros.len(), heuristic))
}

/// JSON form of the SPA analysis.
#[derive(Debug, Serialize, Deserialize)]
pub struct SpaReport {
    pub p_star: f64,
    pub lambda_min_witness: f64,
    pub trace_raw: f64,
    pub state_raw: Vec<[f64; 2]>,
    pub state: Vec<[f64; 2]>,
    pub ppt: PptRecord,
    pub ccnr: CcnrRecord,
}

pub fn cmd_spa(witness: &Witness) -> Result<SpaReport> {
    let spa = spa_witness(witness)?;
    let ppt = ppt_check(&spa.state, witness.da(), witness.db())?;
    let ccnr = ccnr_check(&spa.state, witness.da(), witness.db())?;
    Ok(SpaReport {
        p_star: spa.p_star,
        lambda_min_witness: spa.lambda_min_w,
        trace_raw: spa.state_raw.trace().re,
        state_raw: spa.state_raw.entries().iter().map(|z| [z.re, z.im]).collect(),
        state: spa.state.entries().iter().map(|z| [z.re, z.im]).collect(),
        ppt,
        ccnr,
    })
}
