use super::layout::{check_permutation, CompartmentLayout};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Column-per-output-time state history.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    data: Matrix,
    dt: f64,
    layout: CompartmentLayout,
    cell_weight: f64,
}

impl SnapshotMatrix {
    pub fn new(data: Matrix, dt: f64, layout: CompartmentLayout, cell_weight: f64) -> Result<Self> {
        if data.rows() != layout.state_dim() {
            return Err(Error::input(format!(
                "snapshot has {} rows but layout `{layout}` needs {}",
                data.rows(),
                layout.state_dim()
            )));
        }
        if data.cols() == 0 {
            return Err(Error::input("snapshot matrix has no columns"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::input(format!("snapshot dt must be positive, got {dt}")));
        }
        if !(cell_weight > 0.0 && cell_weight.is_finite()) {
            return Err(Error::input(format!("cell weight must be positive, got {cell_weight}")));
        }
        Ok(Self {
            data,
            dt,
            layout,
            cell_weight,
        })
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn layout(&self) -> &CompartmentLayout {
        &self.layout
    }

    pub fn cell_weight(&self) -> f64 {
        self.cell_weight
    }

    /// Number of stored columns (`m + 1`).
    pub fn columns(&self) -> usize {
        self.data.cols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.column(j)
    }

    /// Columns `start..end` with the same metadata.
    pub fn column_range(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.columns() {
            return Err(Error::input(format!(
                "column range {start}..{end} invalid for {} columns",
                self.columns()
            )));
        }
        Self::new(
            self.data.column_range(start, end),
            self.dt,
            self.layout.clone(),
            self.cell_weight,
        )
    }

    /// The rows of compartment `i` over all columns.
    pub fn compartment_block(&self, i: usize) -> Result<Matrix> {
        if i >= self.layout.compartments() {
            return Err(Error::input(format!(
                "compartment {i} out of range for {} compartments",
                self.layout.compartments()
            )));
        }
        let r = self.layout.block(i);
        Ok(self.data.row_range(r.start, r.end))
    }

    /// One single-compartment snapshot per compartment, in layout order.
    pub fn split_compartments(&self) -> Vec<SnapshotMatrix> {
        (0..self.layout.compartments())
            .map(|i| {
                let layout = CompartmentLayout::single(&self.layout.names()[i], self.layout.node_count())
                    .expect("names already validated");
                let block = self.compartment_block(i).expect("index in range");
                SnapshotMatrix::new(block, self.dt, layout, self.cell_weight).expect("block inherits valid metadata")
            })
            .collect()
    }

    /// Reorders compartment blocks: new block `k` is old block `perm[k]`.
    pub fn permute_compartments(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.layout.compartments())?;
        let blocks: Vec<Matrix> = perm.iter().map(|&i| self.compartment_block(i)).collect::<Result<_>>()?;
        let refs: Vec<&Matrix> = blocks.iter().collect();
        Self::new(
            Matrix::vstack(&refs)?,
            self.dt,
            self.layout.permuted(perm)?,
            self.cell_weight,
        )
    }
}

/// Splits `[u₀ … u_m]` into `Y' = [u₀ … u_{m−1}]` and `Y'' = [u₁ … u_m]`.
pub fn split_pair(y: &SnapshotMatrix) -> Result<(Matrix, Matrix)> {
    let cols = y.columns();
    if cols < 2 {
        return Err(Error::input("split_pair needs at least two snapshot columns"));
    }
    Ok((y.data.column_range(0, cols - 1), y.data.column_range(1, cols)))
}

/// Row-concatenates single-compartment snapshots into one coupled snapshot.
pub fn stack_coupled(parts: &[SnapshotMatrix]) -> Result<SnapshotMatrix> {
    let first = parts
        .first()
        .ok_or_else(|| Error::input("stack_coupled needs at least one part"))?;
    for p in parts {
        if p.layout.compartments() != 1 {
            return Err(Error::input(format!(
                "stack_coupled parts must hold one compartment, `{}` has {}",
                p.layout,
                p.layout.compartments()
            )));
        }
        if p.columns() != first.columns() {
            return Err(Error::input(format!(
                "column counts differ: {} vs {}",
                p.columns(),
                first.columns()
            )));
        }
        if p.dt != first.dt {
            return Err(Error::input(format!("dt differs: {} vs {}", p.dt, first.dt)));
        }
        if p.cell_weight != first.cell_weight {
            return Err(Error::input(format!(
                "cell weight differs: {} vs {}",
                p.cell_weight, first.cell_weight
            )));
        }
    }
    let layout = CompartmentLayout::new(
        parts.iter().map(|p| p.layout.names()[0].clone()),
        first.layout.node_count(),
    )?;
    let blocks: Vec<&Matrix> = parts.iter().map(|p| &p.data).collect();
    SnapshotMatrix::new(Matrix::vstack(&blocks)?, first.dt, layout, first.cell_weight)
}

/// The `i`-th compartment slice `state[i·s .. (i+1)·s]`.
pub fn extract_compartment(state: &[f64], layout: &CompartmentLayout, i: usize) -> Result<Vec<f64>> {
    if state.len() != layout.state_dim() {
        return Err(Error::input(format!(
            "state length {} does not match layout dimension {}",
            state.len(),
            layout.state_dim()
        )));
    }
    if i >= layout.compartments() {
        return Err(Error::input(format!(
            "compartment index {i} out of range for {} compartments",
            layout.compartments()
        )));
    }
    Ok(state[layout.block(i)].to_vec())
}
