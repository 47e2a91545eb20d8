//! Exact dynamic mode decomposition for compartmental systems.
//!
//! The crate fits DMD models either to the stacked state of all compartments
//! (coupled) or to each compartment alone (uncoupled), generates snapshot data
//! from a delayed SIRD reaction–diffusion model and a powder-bed phase-change
//! model, and measures conservation, positivity and error metrics on
//! reference/reconstruction pairs.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dmd;
pub mod error;
pub mod io;
pub mod linalg;
pub mod simulate;

pub use dmd::{
    continuous_eigenvalues, extract_compartment, fit, fit_uncoupled, reconstruct_continuous, reconstruct_discrete,
    split_pair, stack_coupled, Backend, CompartmentLayout, DmdModel, FitDetails, Reconstruction, SnapshotMatrix,
};
pub use error::{Error, ErrorKind, Result};
pub use linalg::{ComplexMatrix, Matrix, SvdFactors};
