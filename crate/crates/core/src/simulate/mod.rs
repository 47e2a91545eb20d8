//! Snapshot generators on uniform grids: a delayed SIRD reaction-diffusion
//! model and a laser powder-bed thermal/phase-change model, both stepped
//! with backward Euler.

mod am;
mod banded;
mod config;
mod grid;
mod sird;

pub use am::{
    laser_source, melt_pool_profile, phase_step, run_am, sigmoid_switch, step_am, AmParams, AmState, AmStepper, Phase,
};
pub use config::{parse_config, read_config, AmConfig, SimConfig, SirdConfig};
pub use grid::{EdgeCondition, Grid};
pub use sird::{
    check_delay_stability, run_sird, step_sird, DelayBuffer, DelayStability, SirdInitial, SirdParams, SirdState,
    NEGATIVITY_TOLERANCE,
};
