//! Fixtures shared by the benchmarks.

use cdmd_core::simulate::{run_sird, Grid, SirdInitial, SirdParams};
use cdmd_core::{Matrix, SnapshotMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform entries in `[-1, 1)`.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Rank-`r` product of two random factors.
pub fn low_rank_matrix(rows: usize, cols: usize, r: usize, seed: u64) -> Matrix {
    random_matrix(rows, r, seed).matmul(&random_matrix(r, cols, seed + 1))
}

/// The default SIRD run on a line of `nodes` nodes.
pub fn sird_snapshots(nodes: usize, steps: usize) -> SnapshotMatrix {
    let grid = Grid::line(nodes, 1.0).expect("valid grid");
    let init = SirdInitial::default().build(&grid).expect("valid initial state");
    run_sird(&grid, &SirdParams::default(), &init, steps, 1).expect("default run is stable")
}
