//! Householder QR for tall matrices, kept in column-major scratch storage.

use super::matrix::{dot, norm2, Matrix};

/// Thin Householder factorisation `A = QR` of an `m × n` matrix with `m ≥ n`.
pub(crate) struct HouseholderQr {
    rows: usize,
    /// Unit reflector vectors; `reflectors[k]` acts on rows `k..m`. Empty when skipped.
    reflectors: Vec<Vec<f64>>,
    /// Upper-triangular factor as columns.
    r_columns: Vec<Vec<f64>>,
}

impl HouseholderQr {
    pub(crate) fn new(a: &Matrix) -> Self {
        Self::from_columns(a.rows(), a.columns())
    }

    pub(crate) fn from_columns(rows: usize, mut cols: Vec<Vec<f64>>) -> Self {
        let n = cols.len();
        assert!(rows >= n, "HouseholderQr needs rows >= cols");
        let mut reflectors = Vec::with_capacity(n);
        for k in 0..n {
            let x = &cols[k][k..];
            let xnorm = norm2(x);
            if xnorm == 0.0 {
                reflectors.push(Vec::new());
                continue;
            }
            let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
            let mut v = x.to_vec();
            v[0] -= alpha;
            let vnorm = norm2(&v);
            if vnorm == 0.0 {
                reflectors.push(Vec::new());
                continue;
            }
            v.iter_mut().for_each(|e| *e /= vnorm);
            for col in cols.iter_mut().skip(k + 1) {
                let tail = &mut col[k..];
                let f = 2.0 * dot(&v, tail);
                if f != 0.0 {
                    tail.iter_mut().zip(&v).for_each(|(t, &vi)| *t -= f * vi);
                }
            }
            let col = &mut cols[k];
            col[k] = alpha;
            col[k + 1..].iter_mut().for_each(|e| *e = 0.0);
            reflectors.push(v);
        }
        let r_columns = cols.into_iter().map(|mut c| {
            c.truncate(n);
            c
        });
        Self {
            rows,
            reflectors,
            r_columns: r_columns.collect(),
        }
    }

    /// The `n × n` triangular factor as columns.
    pub(crate) fn r_columns(&self) -> &[Vec<f64>] {
        &self.r_columns
    }

    /// Applies `Q` to a length-`n` vector padded with zeros to length `m`.
    pub(crate) fn apply_q(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        y[..x.len()].copy_from_slice(x);
        for (k, v) in self.reflectors.iter().enumerate().rev() {
            if v.is_empty() {
                continue;
            }
            let tail = &mut y[k..];
            let f = 2.0 * dot(v, tail);
            if f != 0.0 {
                tail.iter_mut().zip(v).for_each(|(t, &vi)| *t -= f * vi);
            }
        }
        y
    }

    /// `Q · C` for an `n × p` matrix `C` given as columns; returns `m × p`.
    pub(crate) fn q_times(&self, c_columns: &[Vec<f64>]) -> Matrix {
        let cols: Vec<Vec<f64>> = c_columns.iter().map(|c| self.apply_q(c)).collect();
        let mut out = Matrix::zeros(self.rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            out.set_column(j, c);
        }
        out
    }

    /// Explicit thin `Q` (`m × n`).
    pub(crate) fn thin_q(&self) -> Matrix {
        let n = self.r_columns.len();
        let basis: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect();
        self.q_times(&basis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_input_and_q_is_orthonormal() {
        let a = Matrix::from_fn(7, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.7 + 0.1 * j as f64);
        let qr = HouseholderQr::new(&a);
        let q = qr.thin_q();
        let mut r = Matrix::zeros(4, 4);
        for (j, c) in qr.r_columns().iter().enumerate() {
            r.set_column(j, c);
        }
        let back = q.matmul(&r);
        assert!(back.sub(&a).max_abs() < 1e-13);
        let qtq = q.t_matmul(&q);
        assert!(qtq.sub(&Matrix::identity(4)).max_abs() < 1e-14);
        for i in 0..4 {
            for j in 0..i {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn zero_columns_are_skipped() {
        let a = Matrix::from_fn(3, 2, |i, j| if j == 0 { 0.0 } else { i as f64 + 1.0 });
        let qr = HouseholderQr::new(&a);
        let q = qr.thin_q();
        let mut r = Matrix::zeros(2, 2);
        for (j, c) in qr.r_columns().iter().enumerate() {
            r.set_column(j, c);
        }
        assert!(q.matmul(&r).sub(&a).max_abs() < 1e-14);
    }
}
