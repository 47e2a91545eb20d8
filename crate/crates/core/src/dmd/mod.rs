//! Exact DMD: snapshot handling, fitting in coupled or uncoupled mode, and
//! discrete/continuous reconstruction.

mod layout;
mod model;
mod snapshot;
mod spectrum;

pub use layout::CompartmentLayout;
pub use model::{
    fit, fit_uncoupled, reconstruct_continuous, reconstruct_discrete, Backend, DmdModel, FitDetails, Reconstruction,
};
pub use snapshot::{extract_compartment, split_pair, stack_coupled, SnapshotMatrix};
pub use spectrum::{continuous_eigenvalues, is_decayed};
