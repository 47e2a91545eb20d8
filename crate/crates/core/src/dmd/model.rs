use num_complex::Complex64;
use rayon::prelude::*;

use super::layout::CompartmentLayout;
use super::snapshot::{split_pair, SnapshotMatrix};
use super::spectrum::{continuous_eigenvalues, on_negative_real_axis};
use crate::error::{Error, Result};
use crate::linalg::{complex_least_squares, eig_real, norm2, randomized_svd, truncated_svd, ComplexMatrix, Matrix};

/// Which SVD feeds the projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Exact,
    Randomized {
        seed: u64,
        oversample: usize,
        power_iters: usize,
    },
}

/// By-products of a fit, kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct FitDetails {
    /// `UᵣᵀY''VᵣΣᵣ⁻¹` over the retained triplets.
    pub a_tilde: Matrix,
    /// Retained singular values of `Y'`.
    pub sigma: Vec<f64>,
    /// `‖Y'' − A Y'‖_F / ‖Y''‖_F` with `A = Y''VᵣΣᵣ⁻¹Uᵣᵀ`.
    pub training_residual: f64,
    /// Requested rank minus the rank actually used.
    pub dropped_rank: usize,
    /// `‖Re(Ψb) − u₀‖₂ / ‖u₀‖₂` (absolute when `u₀ = 0`).
    pub initial_residual: f64,
    /// The amplitude solve hit a rank-deficient Ψ.
    pub amplitude_rank_deficient: bool,
}

/// A fitted exact DMD model.
#[derive(Debug, Clone, PartialEq)]
pub struct DmdModel {
    pub psi: ComplexMatrix,
    pub lambda: Vec<Complex64>,
    pub omega: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub rank: usize,
    pub dt: f64,
    pub layout: CompartmentLayout,
    /// Cell measure carried over from the snapshots.
    pub cell_weight: f64,
    /// Number of snapshot columns the model was trained on.
    pub train_columns: Option<usize>,
    /// Absent for models read back from disk.
    pub fit_details: Option<FitDetails>,
}

/// A reconstructed state with its quality flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub state: Vec<f64>,
    /// `‖Im(·)‖∞` of the complex expansion before taking the real part.
    pub imag_max: f64,
    /// Some eigenvalue lies on the closed negative real axis, so the
    /// continuous expansion used a branch that may disagree with `Λᵏ`.
    pub branch_warning: bool,
}

impl DmdModel {
    pub fn state_dim(&self) -> usize {
        self.psi.rows()
    }

    /// Checks the shape invariants tying the fields together.
    pub fn validate(&self) -> Result<()> {
        let r = self.rank;
        if r == 0 {
            return Err(Error::input("model rank must be positive"));
        }
        if self.psi.cols() != r || self.lambda.len() != r || self.omega.len() != r || self.b.len() != r {
            return Err(Error::input(format!(
                "model field lengths disagree with rank {r}: psi {}x{}, lambda {}, omega {}, b {}",
                self.psi.rows(),
                self.psi.cols(),
                self.lambda.len(),
                self.omega.len(),
                self.b.len()
            )));
        }
        if self.psi.rows() != self.layout.state_dim() {
            return Err(Error::input(format!(
                "psi has {} rows but layout `{}` needs {}",
                self.psi.rows(),
                self.layout,
                self.layout.state_dim()
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::input(format!("model dt must be positive, got {}", self.dt)));
        }
        if !(self.cell_weight > 0.0 && self.cell_weight.is_finite()) {
            return Err(Error::input("model cell weight must be positive"));
        }
        Ok(())
    }

    /// Reconstructs columns `0..count` as a snapshot matrix.
    pub fn reconstruct_snapshots(&self, count: usize) -> Result<SnapshotMatrix> {
        if count == 0 {
            return Err(Error::input("reconstruction needs at least one column"));
        }
        let cols: Vec<Vec<f64>> = (0..count).map(|k| reconstruct_discrete(self, k).state).collect();
        SnapshotMatrix::new(
            Matrix::from_columns(&cols)?,
            self.dt,
            self.layout.clone(),
            self.cell_weight,
        )
    }

    /// Reconstruction at time `t`. Grid times `t = k·dt` use `Λᵏ` so that
    /// negative real eigenvalues stay exact; other times use `exp(Ωt)`.
    pub fn reconstruct_at(&self, t: f64) -> Result<Reconstruction> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::input(format!("reconstruction time must be >= 0, got {t}")));
        }
        let k = (t / self.dt).round();
        if (t - k * self.dt).abs() <= 1e-9 * self.dt.max(t) && k <= u32::MAX as f64 {
            Ok(reconstruct_discrete(self, k as usize))
        } else {
            reconstruct_continuous(self, t)
        }
    }
}

/// Fits an exact DMD model of rank `r` to the snapshot matrix.
pub fn fit(y: &SnapshotMatrix, r: usize, backend: Backend) -> Result<DmdModel> {
    let (y1, y2) = split_pair(y)?;
    let (n, m) = y1.shape();
    let max_rank = n.min(m);
    if r == 0 || r > max_rank {
        return Err(Error::input(format!(
            "rank {r} outside 1..={max_rank} for a {n}x{} snapshot matrix",
            m + 1
        )));
    }
    if y1.max_abs() == 0.0 {
        return Err(Error::numeric("snapshot matrix is zero; there are no dynamics to fit"));
    }

    let factors = match backend {
        Backend::Exact => truncated_svd(&y1, r)?,
        Backend::Randomized {
            seed,
            oversample,
            power_iters,
        } => randomized_svd(&y1, r, oversample, power_iters, seed)?,
    };
    let k = factors.rank_used;
    if k == 0 {
        return Err(Error::numeric("all singular values of Y' were dropped"));
    }
    let u = factors.u.column_range(0, k);
    let v = factors.v.column_range(0, k);
    let sigma = factors.sigma[..k].to_vec();

    // Y'' V Σ⁻¹ is shared by Ã, Ψ and the training residual.
    let mut y2_v = y2.matmul(&v);
    y2_v.scale_columns(&sigma.iter().map(|s| 1.0 / s).collect::<Vec<_>>());
    let a_tilde = u.t_matmul(&y2_v);
    let eig = eig_real(&a_tilde)?;

    let psi = ComplexMatrix::real_rmul(&y2_v, &eig.vectors);
    let u0 = y.column(0);
    let ls = complex_least_squares(&psi, &u0)?;
    let omega = continuous_eigenvalues(&eig.values, y.dt())?;

    let propagated = y2_v.matmul(&u.t_matmul(&y1));
    let y2_norm = y2.frobenius_norm();
    let misfit = y2.sub(&propagated).frobenius_norm();
    let training_residual = if y2_norm > 0.0 { misfit / y2_norm } else { misfit };

    let mut model = DmdModel {
        psi,
        lambda: eig.values,
        omega,
        b: ls.solution,
        rank: k,
        dt: y.dt(),
        layout: y.layout().clone(),
        cell_weight: y.cell_weight(),
        train_columns: Some(y.columns()),
        fit_details: None,
    };
    let rec0 = reconstruct_discrete(&model, 0).state;
    let diff: Vec<f64> = rec0.iter().zip(&u0).map(|(a, b)| a - b).collect();
    let u0_norm = norm2(&u0);
    let initial_residual = if u0_norm > 0.0 {
        norm2(&diff) / u0_norm
    } else {
        norm2(&diff)
    };

    model.fit_details = Some(FitDetails {
        a_tilde,
        sigma,
        training_residual,
        dropped_rank: r - k,
        initial_residual,
        amplitude_rank_deficient: ls.rank_deficient,
    });
    Ok(model)
}

/// Fits one model per part. Parts run in parallel; output order matches input.
pub fn fit_uncoupled(parts: &[SnapshotMatrix], r: usize, backend: Backend) -> Result<Vec<DmdModel>> {
    if parts.is_empty() {
        return Err(Error::input("fit_uncoupled needs at least one part"));
    }
    parts
        .par_iter()
        .map(|part| {
            fit(part, r, backend).map_err(|e| Error::Compartment {
                name: part.layout().names().join("+"),
                source: Box::new(e),
            })
        })
        .collect()
}

/// `Re(Ψ Λᵏ b)`.
pub fn reconstruct_discrete(model: &DmdModel, k: usize) -> Reconstruction {
    let power = u32::try_from(k).unwrap_or(u32::MAX);
    let coeffs: Vec<Complex64> = model
        .lambda
        .iter()
        .zip(&model.b)
        .map(|(l, b)| l.powu(power) * b)
        .collect();
    expand(model, &coeffs, false)
}

/// `Re(Ψ exp(Ωt) b)`.
pub fn reconstruct_continuous(model: &DmdModel, t: f64) -> Result<Reconstruction> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::input(format!("reconstruction time must be >= 0, got {t}")));
    }
    let coeffs: Vec<Complex64> = model
        .omega
        .iter()
        .zip(&model.b)
        .map(|(w, b)| {
            if w.re == f64::NEG_INFINITY {
                // Decayed mode: λ = 0 contributes only at t = 0.
                if t == 0.0 {
                    *b
                } else {
                    Complex64::new(0.0, 0.0)
                }
            } else {
                (w * t).exp() * b
            }
        })
        .collect();
    let warn = model.lambda.iter().any(|l| on_negative_real_axis(*l));
    Ok(expand(model, &coeffs, warn))
}

fn expand(model: &DmdModel, coeffs: &[Complex64], branch_warning: bool) -> Reconstruction {
    let full = model.psi.matvec(coeffs);
    let imag_max = full.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
    Reconstruction {
        state: full.iter().map(|z| z.re).collect(),
        imag_max,
        branch_warning,
    }
}
