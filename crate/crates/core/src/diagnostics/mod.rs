//! Conservation, positivity and error metrics on reference/reconstruction
//! snapshot pairs.

mod report;

pub use report::{diagnose, DiagnoseOptions, DiagnosticsReport, Verdict};

use num_complex::Complex64;

use crate::dmd::{fit, Backend, SnapshotMatrix};
use crate::error::{Error, Result};

/// Entries below this count as a loss of positivity.
pub const NEGATIVITY_TOLERANCE: f64 = -1e-8;
/// Denominator floor for relative errors.
pub const L2_FLOOR: f64 = 1e-30;

fn check_subset(y: &SnapshotMatrix, subset: &[usize]) -> Result<()> {
    let n = y.layout().compartments();
    if subset.is_empty() {
        return Err(Error::input("compartment subset is empty"));
    }
    if let Some(bad) = subset.iter().find(|&&c| c >= n) {
        return Err(Error::input(format!(
            "compartment index {bad} out of range for {n} compartments"
        )));
    }
    Ok(())
}

fn check_same_shape(reference: &SnapshotMatrix, rec: &SnapshotMatrix) -> Result<()> {
    if reference.layout() != rec.layout() {
        return Err(Error::input(format!(
            "layouts differ: `{}` vs `{}`",
            reference.layout(),
            rec.layout()
        )));
    }
    if reference.columns() != rec.columns() {
        return Err(Error::input(format!(
            "column counts differ: {} vs {}",
            reference.columns(),
            rec.columns()
        )));
    }
    Ok(())
}

/// Resolves a comma-separated list of compartment names or indices.
pub fn resolve_subset(y: &SnapshotMatrix, spec: &str) -> Result<Vec<usize>> {
    let layout = y.layout();
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let idx = match layout.index_of(item) {
            Some(i) => i,
            None => item
                .parse::<usize>()
                .map_err(|_| Error::input(format!("`{item}` is neither a compartment of `{layout}` nor an index")))?,
        };
        if !out.contains(&idx) {
            out.push(idx);
        }
    }
    check_subset(y, &out)?;
    Ok(out)
}

/// `cell_weight × Σ` of the selected compartment blocks, per column.
pub fn mass_series(y: &SnapshotMatrix, subset: &[usize]) -> Result<Vec<f64>> {
    check_subset(y, subset)?;
    let data = y.data();
    let mut out = vec![0.0; y.columns()];
    for &c in subset {
        for row in y.layout().block(c) {
            for (acc, v) in out.iter_mut().zip(data.row(row)) {
                *acc += v;
            }
        }
    }
    out.iter_mut().for_each(|m| *m *= y.cell_weight());
    Ok(out)
}

/// Outcome of a conservation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationCheck {
    pub passed: bool,
    /// `max_j |mass_j − mass_0| / |mass_0|`, or absolute when `mass_0 = 0`.
    pub drift: f64,
    pub absolute: bool,
}

pub fn conservation_check(y: &SnapshotMatrix, subset: &[usize], rel_tol: f64) -> Result<ConservationCheck> {
    Ok(drift_of(&mass_series(y, subset)?, rel_tol))
}

pub(crate) fn drift_of(masses: &[f64], rel_tol: f64) -> ConservationCheck {
    let m0 = masses[0];
    let max_dev = masses.iter().fold(0.0f64, |acc, m| acc.max((m - m0).abs()));
    let absolute = m0 == 0.0;
    let drift = if absolute { max_dev } else { max_dev / m0.abs() };
    ConservationCheck {
        passed: drift <= rel_tol,
        drift,
        absolute,
    }
}

/// Per-column relative L² error of one compartment.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Series {
    pub values: Vec<f64>,
    /// Columns whose reference norm is below [`L2_FLOOR`]; the ratio there
    /// says nothing about accuracy.
    pub vacuous: Vec<bool>,
}

pub fn relative_l2_series(reference: &SnapshotMatrix, rec: &SnapshotMatrix, compartment: usize) -> Result<L2Series> {
    check_same_shape(reference, rec)?;
    check_subset(reference, &[compartment])?;
    let rows = reference.layout().block(compartment);
    let cols = reference.columns();
    let mut num = vec![0.0; cols];
    let mut den = vec![0.0; cols];
    for row in rows {
        let a = reference.data().row(row);
        let b = rec.data().row(row);
        for j in 0..cols {
            num[j] += (a[j] - b[j]).powi(2);
            den[j] += a[j] * a[j];
        }
    }
    let den: Vec<f64> = den.iter().map(|d| d.sqrt()).collect();
    Ok(L2Series {
        values: num.iter().zip(&den).map(|(n, d)| n.sqrt() / d.max(L2_FLOOR)).collect(),
        vacuous: den.iter().map(|&d| d < L2_FLOOR).collect(),
    })
}

/// Result of the `L¹ ≤ 2M` test.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Check {
    /// Both datasets are entrywise non-negative on the subset.
    pub applicable: bool,
    pub satisfied: bool,
    /// `cell_weight · Σ|ref − rec|` over the subset, per column.
    pub lhs: Vec<f64>,
    /// `2M` with `M` the reference subset mass of column 0.
    pub bound: f64,
}

impl L1Check {
    pub fn max_lhs(&self) -> f64 {
        self.lhs.iter().fold(0.0f64, |a, &b| a.max(b))
    }
}

pub fn l1_bound_check(reference: &SnapshotMatrix, rec: &SnapshotMatrix, subset: &[usize]) -> Result<L1Check> {
    check_same_shape(reference, rec)?;
    check_subset(reference, subset)?;
    let cols = reference.columns();
    let mut lhs = vec![0.0; cols];
    let mut applicable = true;
    for &c in subset {
        for row in reference.layout().block(c) {
            let a = reference.data().row(row);
            let b = rec.data().row(row);
            for j in 0..cols {
                if a[j] < -1e-10 || b[j] < -1e-10 {
                    applicable = false;
                }
                lhs[j] += (a[j] - b[j]).abs();
            }
        }
    }
    lhs.iter_mut().for_each(|v| *v *= reference.cell_weight());
    let bound = 2.0 * mass_series(reference, subset)?[0];
    let satisfied = applicable && lhs.iter().all(|&v| v <= bound * (1.0 + 1e-9));
    Ok(L1Check {
        applicable,
        satisfied,
        lhs,
        bound,
    })
}

/// First column holding an entry below [`NEGATIVITY_TOLERANCE`].
pub fn nonnegativity_horizon(rec: &SnapshotMatrix) -> Option<usize> {
    let data = rec.data();
    (0..rec.columns()).find(|&j| (0..data.rows()).any(|i| data[(i, j)] < NEGATIVITY_TOLERANCE))
}

/// Greedy matching distance between two eigenvalue multisets: each value of
/// `a`, in order, claims its nearest unclaimed partner in `b`.
pub fn eigenvalue_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::input(format!(
            "spectra have different sizes: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("sizes match");
        used[k] = true;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Fits rank-`r` models to `y` and to its block-permuted copy and returns
/// the matching distance between their eigenvalues.
pub fn permutation_spectrum_test(y: &SnapshotMatrix, block_perm: &[usize], r: usize) -> Result<f64> {
    let permuted = y.permute_compartments(block_perm)?;
    let a = fit(y, r, Backend::Exact)?;
    let b = fit(&permuted, r, Backend::Exact)?;
    if a.rank != b.rank {
        return Err(Error::numeric(format!(
            "retained ranks differ after permutation: {} vs {}",
            a.rank, b.rank
        )));
    }
    eigenvalue_distance(&a.lambda, &b.lambda)
}
