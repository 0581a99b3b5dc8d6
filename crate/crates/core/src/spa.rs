//! Structural physical approximation and necessary entanglement criteria.
//!
//! The SPA of a witness W mixes it with the maximally mixed operator using
//! the largest witness weight that keeps the result PSD:
//! p* = 1 / (1 + dA dB |lambda_min|). The resulting (generally unnormalized)
//! operator W(p*) = p* W + (1 - p*) 1/(dA dB) is a state after trace
//! normalization. Whether that state is entangled is probed here only with
//! necessary criteria (partial transpose and realignment); when both are
//! silent the result is inconclusive, and no claim is made.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_min_eig, partial_transpose, singular_values, ComplexMatrix, Subsystem,
};
use crate::witness::Witness;

/// SPA output: the mixing weight, the unnormalized operator, and the
/// trace-normalized state.
#[derive(Debug, Clone)]
pub struct SpaResult {
    pub p_star: f64,
    pub state_raw: ComplexMatrix,
    pub state: ComplexMatrix,
    pub lambda_min_w: f64,
}

/// Mix the witness with the maximally mixed operator at the critical weight.
///
/// For a PSD input there is nothing to lift: p* = 1 and the state is the
/// trace-normalized input itself.
pub fn spa_witness(w: &Witness) -> Result<SpaResult> {
    let dim = w.dim() as f64;
    let lambda_min_w = hermitian_min_eig(w.matrix())?;
    let p_star = 1.0 / (1.0 + dim * (-lambda_min_w).max(0.0));
    let mixed = ComplexMatrix::identity(w.dim()).scale_real((1.0 - p_star) / dim);
    let state_raw = w.matrix().scale_real(p_star).add(&mixed);
    let trace = state_raw.trace().re;
    if trace <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "SPA operator has nonpositive trace {trace:.3e}"
        )));
    }
    let state = state_raw.scale_real(1.0 / trace);
    Ok(SpaResult {
        p_star,
        state_raw,
        state,
        lambda_min_w,
    })
}

/// Partial-transpose record: NPT certifies entanglement, PPT is silent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PptRecord {
    pub min_eig_pt: f64,
    pub is_npt: bool,
}

pub fn ppt_check(rho: &ComplexMatrix, da: usize, db: usize) -> Result<PptRecord> {
    validate_psd(rho, "ppt_check")?;
    let pt = partial_transpose(rho, da, db, Subsystem::B)?;
    let min_eig_pt = hermitian_min_eig(&pt)?;
    let is_npt = min_eig_pt < -1e-10 * rho.frobenius_norm();
    Ok(PptRecord { min_eig_pt, is_npt })
}

/// Realignment record: trace norm above 1 certifies entanglement.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CcnrRecord {
    pub realignment_trace_norm: f64,
    pub flags_entangled: bool,
}

pub fn ccnr_check(rho: &ComplexMatrix, da: usize, db: usize) -> Result<CcnrRecord> {
    validate_psd(rho, "ccnr_check")?;
    if (rho.trace().re - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "realignment criterion needs a unit-trace state, trace is {:.12}",
            rho.trace().re
        )));
    }
    let r = realign(rho, da, db)?;
    let realignment_trace_norm: f64 = singular_values(&r).iter().sum();
    Ok(CcnrRecord {
        realignment_trace_norm,
        flags_entangled: realignment_trace_norm > 1.0 + 1e-10,
    })
}

/// R(rho)_{(i,k),(j,l)} = rho_{(i,j),(k,l)}: a dA^2 x dB^2 matrix.
fn realign(rho: &ComplexMatrix, da: usize, db: usize) -> Result<ComplexMatrix> {
    let n = da * db;
    if !rho.is_square() || rho.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, expected {}x{}",
            rho.rows(),
            rho.cols(),
            n,
            n
        )));
    }
    let mut r = ComplexMatrix::zeros(da * da, db * db);
    for i in 0..da {
        for k in 0..da {
            for j in 0..db {
                for l in 0..db {
                    r[(i * da + k, j * db + l)] = rho[(i * db + j, k * db + l)];
                }
            }
        }
    }
    Ok(r)
}

fn validate_psd(rho: &ComplexMatrix, what: &str) -> Result<()> {
    let tol = Tolerances::default();
    let min = hermitian_min_eig(rho)
        .map_err(|_| Error::InvalidState(format!("{what}: state is not Hermitian")))?;
    if min < -tol.psd_rel * rho.frobenius_norm() {
        return Err(Error::InvalidState(format!(
            "{what}: state is not PSD (min eigenvalue {min:.3e})"
        )));
    }
    Ok(())
}
