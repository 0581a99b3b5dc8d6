//! Numerical tolerances used across the crate.
//!
//! Everything threshold-like lives here so a single struct controls the
//! numerics instead of magic numbers scattered through the modules. All
//! `*_rel` values are relative to the Frobenius norm of the operator they
//! are applied to; the rest are absolute.

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// PSD decision: min eigenvalue >= -psd_rel * ||H||_F.
    pub psd_rel: f64,
    /// Rank decision: singular values above span_rel * sigma_max count.
    pub span_rel: f64,
    /// Hermiticity validation: ||H - H'||_F <= herm_rel * ||H||_F.
    pub herm_rel: f64,
    /// Unit-norm validation for state vectors.
    pub unit_norm: f64,
    /// |<e,f|W|e,f>| below this counts as membership in the zero set.
    pub kernel_membership: f64,
    /// First-order expansion terms must vanish below this.
    pub first_order: f64,
    /// Block-positivity slack for see-saw feasibility decisions.
    pub block_positivity: f64,
    /// Two product vectors with fidelity above 1 - this are one cluster.
    pub cluster_fidelity_gap: f64,
    /// Strict-positivity floor for the nonoptimality verdict,
    /// relative to ||W||_F.
    pub verdict_gap_rel: f64,
    /// Zero-set harvest: accepted values, relative to ||W||_F.
    pub zero_value_rel: f64,
    /// Absolute tolerance on the subtraction certificate bisection.
    pub lambda_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            psd_rel: 1e-10,
            span_rel: 1e-9,
            herm_rel: 1e-12,
            unit_norm: 1e-12,
            kernel_membership: 1e-10,
            first_order: 1e-10,
            block_positivity: 1e-9,
            cluster_fidelity_gap: 1e-6,
            verdict_gap_rel: 1e-7,
            zero_value_rel: 1e-9,
            lambda_tol: 1e-4,
        }
    }
}
