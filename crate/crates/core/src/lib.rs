//! Construction and analysis of bipartite entanglement witnesses.
//!
//! The crate builds the parameterized 3x3 witness family and the two-qubit
//! boundary fixture, decides nonoptimality through a second-order
//! perturbation certificate, verifies block positivity by see-saw
//! minimization over product states, computes structural physical
//! approximations, and drives the lambda_max parameter sweep behind the
//! `ewopt` CLI.

pub mod config;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod optimality;
pub mod seesaw;
pub mod spa;
pub mod witness;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, Spectrum, Subsystem};
pub use witness::{HaKyeParams, ProductVector, Witness};
