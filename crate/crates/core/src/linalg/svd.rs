//! Thin SVD by one-sided Jacobi rotations on the triangular factor of a QR
//! preconditioning step, plus Eckart–Young truncation and pseudoinverse
//! application.

use super::matrix::{dot, norm2, Matrix};
use super::qr::HouseholderQr;
use crate::error::{Error, Result};

/// Singular values with `σᵢ/σ₀` below this are treated as zero.
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Sweep limit for the Jacobi iteration.
pub const MAX_SWEEPS: usize = 60;

/// Thin singular value factors `M ≈ U diag(σ) Vᵀ`.
///
/// `sigma` is non-increasing. Only the first `rank_used` triplets take part in
/// reconstructions and pseudoinverse solves; the remainder were kept for
/// reporting but fell under [`DROP_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
    pub rank_used: usize,
}

impl SvdFactors {
    /// `U_k Σ_k V_kᵀ` over the `rank_used` retained triplets.
    pub fn reconstruct(&self) -> Matrix {
        let k = self.rank_used;
        let mut us = self.u.column_range(0, k);
        us.scale_columns(&self.sigma[..k]);
        us.matmul(&self.v.column_range(0, k).transpose())
    }

    /// Keeps the first `r` triplets and recomputes `rank_used`.
    pub(crate) fn truncate(mut self, r: usize) -> Self {
        let r = r.min(self.sigma.len());
        self.u = self.u.column_range(0, r);
        self.v = self.v.column_range(0, r);
        self.sigma.truncate(r);
        self.rank_used = retained_rank(&self.sigma);
        self
    }

    fn transposed(self) -> Self {
        Self {
            u: self.v,
            sigma: self.sigma,
            v: self.u,
            rank_used: self.rank_used,
        }
    }
}

/// Number of leading singular values with `σᵢ/σ₀ ≥ DROP_TOLERANCE`.
pub fn retained_rank(sigma: &[f64]) -> usize {
    match sigma.first() {
        Some(&s0) if s0 > 0.0 => sigma.iter().take_while(|&&s| s / s0 >= DROP_TOLERANCE).count(),
        _ => 0,
    }
}

/// Thin SVD of a tall (`rows ≥ cols`) matrix; `r = cols` triplets.
pub fn svd(m: &Matrix) -> Result<SvdFactors> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::input("svd of an empty matrix"));
    }
    if m.rows() < m.cols() {
        return Err(Error::input(format!(
            "svd needs rows >= cols, got {}x{}; transpose first",
            m.rows(),
            m.cols()
        )));
    }
    check_finite(m)?;
    tall_svd(m)
}

/// Leading `r` singular triplets of any-shaped `m`.
///
/// Trailing triplets with `σᵢ/σ₀ < DROP_TOLERANCE` are excluded from
/// `rank_used`, so `rank_used ≤ r`.
pub fn truncated_svd(m: &Matrix, r: usize) -> Result<SvdFactors> {
    let full = thin_svd(m)?;
    let max_rank = m.rows().min(m.cols());
    if r == 0 || r > max_rank {
        return Err(Error::input(format!("truncation rank {r} outside 1..={max_rank}")));
    }
    Ok(full.truncate(r))
}

/// Thin SVD of any shape with `min(rows, cols)` triplets.
pub(crate) fn thin_svd(m: &Matrix) -> Result<SvdFactors> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::input("svd of an empty matrix"));
    }
    check_finite(m)?;
    if m.rows() >= m.cols() {
        tall_svd(m)
    } else {
        let mut f = tall_svd(&m.transpose())?.transposed();
        apply_sign_convention(&mut f.u, &mut f.v);
        Ok(f)
    }
}

/// `V_k Σ_k⁻¹ U_kᵀ y` over the retained triplets only.
pub fn pseudoinverse_apply(f: &SvdFactors, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != f.u.rows() {
        return Err(Error::input(format!(
            "pseudoinverse_apply: vector length {} does not match {} rows",
            y.len(),
            f.u.rows()
        )));
    }
    let mut x = vec![0.0; f.v.rows()];
    for k in 0..f.rank_used {
        let coeff = (0..f.u.rows()).map(|i| f.u[(i, k)] * y[i]).sum::<f64>() / f.sigma[k];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += coeff * f.v[(i, k)];
        }
    }
    Ok(x)
}

fn check_finite(m: &Matrix) -> Result<()> {
    if m.as_slice().iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::input("svd input contains non-finite entries"))
    }
}

fn tall_svd(m: &Matrix) -> Result<SvdFactors> {
    let n = m.cols();
    let qr = HouseholderQr::new(m);
    let (g, vcols) = jacobi(qr.r_columns().to_vec())?;

    let total = g.iter().map(|c| dot(c, c)).sum::<f64>().sqrt();
    let norms: Vec<f64> = g
        .iter()
        .map(|c| norm2(c))
        .map(|s| if s <= f64::EPSILON * total { 0.0 } else { s })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut ur: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut zero_slots = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            ur.push(g[j].iter().map(|x| x / norms[j]).collect());
        } else {
            ur.push(Vec::new());
            zero_slots.push(slot);
        }
    }
    complete_basis(&mut ur, &zero_slots, n);

    let u = qr.q_times(&ur);
    let mut v = Matrix::zeros(n, n);
    for (slot, &j) in order.iter().enumerate() {
        v.set_column(slot, &vcols[j]);
    }
    let mut u = u;
    apply_sign_convention(&mut u, &mut v);
    let rank_used = retained_rank(&sigma);
    Ok(SvdFactors { u, sigma, v, rank_used })
}

type Columns = Vec<Vec<f64>>;

/// One-sided Jacobi on a square matrix given as columns. Returns the rotated
/// columns (orthogonal, norms = singular values) and the accumulated `V`.
fn jacobi(mut g: Columns) -> Result<(Columns, Columns)> {
    let n = g.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let tol = f64::EPSILON;
    // Columns at rounding level of the whole matrix are left alone; they
    // cannot be orthogonalised reliably and are flushed to zero afterwards.
    let total: f64 = g.iter().map(|c| dot(c, c)).sum();
    let floor = tol * tol * total;
    let mut last_pair = (0, 0);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&g[p], &g[p]);
                let beta = dot(&g[q], &g[q]);
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let gamma = dot(&g[p], &g[q]);
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                last_pair = (p, q);
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut g, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            return Ok((g, v));
        }
    }
    Err(Error::numeric(format!(
        "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps (column {} against {})",
        last_pair.0, last_pair.1
    )))
}

#[inline]
fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Fills empty slots with unit vectors orthogonal to the filled ones.
fn complete_basis(cols: &mut [Vec<f64>], empty: &[usize], n: usize) {
    let mut candidate = 0;
    for &slot in empty {
        while candidate < n {
            let mut e = vec![0.0; n];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for c in cols.iter().filter(|c| !c.is_empty()) {
                    let proj = dot(c, &e);
                    e.iter_mut().zip(c).for_each(|(x, &ci)| *x -= proj * ci);
                }
            }
            let nrm = norm2(&e);
            if nrm > 1e-8 {
                e.iter_mut().for_each(|x| *x /= nrm);
                cols[slot] = e;
                break;
            }
        }
    }
}

/// Flips singular vector pairs so the largest-magnitude entry of each `u`
/// column is non-negative (ties go to the lowest row index).
pub(crate) fn apply_sign_convention(u: &mut Matrix, v: &mut Matrix) {
    for j in 0..u.cols() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for i in 0..u.rows() {
            let x = u[(i, j)];
            if x.abs() > best {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            for i in 0..u.rows() {
                u[(i, j)] = -u[(i, j)];
            }
            for i in 0..v.rows() {
                v[(i, j)] = -v[(i, j)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormality_error(m: &Matrix) -> f64 {
        m.t_matmul(m).sub(&Matrix::identity(m.cols())).max_abs()
    }

    #[test]
    fn identity_factors_are_identity() {
        let f = svd(&Matrix::identity(2)).unwrap();
        assert_eq!(f.sigma, vec![1.0, 1.0]);
        assert_eq!(f.u, Matrix::identity(2));
        assert_eq!(f.v, Matrix::identity(2));
    }

    #[test]
    fn diagonal_values_are_sorted_absolute_diagonal() {
        let f = svd(&Matrix::from_diag(&[2.0, -3.0])).unwrap();
        assert_eq!(f.sigma, vec![3.0, 2.0]);
        assert!(f.reconstruct().sub(&Matrix::from_diag(&[2.0, -3.0])).max_abs() < 1e-15);
    }

    #[test]
    fn wide_input_is_rejected_by_plain_svd() {
        let m = Matrix::zeros(2, 3);
        assert!(matches!(svd(&m), Err(Error::Input(_))));
        assert!(truncated_svd(&Matrix::from_fn(2, 3, |i, j| (i + j) as f64 + 1.0), 2).is_ok());
    }

    #[test]
    fn non_finite_input_is_an_input_error() {
        let m = Matrix::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { f64::INFINITY } else { 1.0 });
        assert!(matches!(svd(&m), Err(Error::Input(_))));
    }

    #[test]
    fn rank_out_of_range_is_rejected() {
        let m = Matrix::identity(3);
        assert!(truncated_svd(&m, 0).is_err());
        assert!(truncated_svd(&m, 4).is_err());
    }

    #[test]
    fn zero_matrix_has_orthonormal_factors_and_no_retained_rank() {
        let f = svd(&Matrix::zeros(4, 3)).unwrap();
        assert_eq!(f.sigma, vec![0.0; 3]);
        assert_eq!(f.rank_used, 0);
        assert!(orthonormality_error(&f.u) < 1e-14);
        assert!(orthonormality_error(&f.v) < 1e-14);
    }

    #[test]
    fn sign_convention_makes_largest_entry_non_negative() {
        let m = Matrix::from_fn(5, 3, |i, j| ((i + 2 * j) as f64).sin() - 0.3);
        let f = svd(&m).unwrap();
        for j in 0..3 {
            let col = f.u.column(j);
            let big = col
                .iter()
                .cloned()
                .fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
            assert!(big >= 0.0);
        }
    }

    #[test]
    fn pseudoinverse_of_diagonal_inverts() {
        let f = svd(&Matrix::from_diag(&[2.0, 4.0])).unwrap();
        let x = pseudoinverse_apply(&f, &[2.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert!(pseudoinverse_apply(&f, &[1.0]).is_err());
    }

    #[test]
    fn pseudoinverse_skips_dropped_triplets() {
        // rank-1 matrix: the second singular value is dropped, nothing blows up.
        let m = Matrix::from_fn(3, 2, |i, j| (i as f64 + 1.0) * (j as f64 + 1.0));
        let f = truncated_svd(&m, 2).unwrap();
        assert_eq!(f.rank_used, 1);
        let x = pseudoinverse_apply(&f, &[1.0, 0.0, 0.0]).unwrap();
        assert!(x.iter().all(|v| v.is_finite() && v.abs() < 1.0));
    }
}
