#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

/// Square banded matrix with equal lower and upper half bandwidth, factored
/// in place by LU without pivoting. Only used for diagonally dominant
/// operators, where skipping pivoting is stable.
#[derive(Debug, Clone)]
pub(crate) struct BandedMatrix {
    n: usize,
    bw: usize,
    // Row i stores columns i-bw ..= i+bw at offsets 0 ..= 2bw.
    data: Vec<f64>,
    factored: bool,
}

impl BandedMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (2 * bw + 1)],
            factored: false,
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.bw >= i && j <= i + self.bw);
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    /// Replaces row `i` with the identity row (Dirichlet node).
    pub fn set_identity_row(&mut self, i: usize) {
        let w = 2 * self.bw + 1;
        self.data[i * w..(i + 1) * w].fill(0.0);
        let s = self.slot(i, i);
        self.data[s] = 1.0;
    }

    pub fn factor(&mut self) -> Result<()> {
        let (n, bw) = (self.n, self.bw);
        for k in 0..n {
            let pivot = self.data[self.slot(k, k)];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::numeric(format!("zero pivot at row {k} in banded LU")));
            }
            let last = (k + bw).min(n - 1);
            for i in k + 1..=last {
                let sik = self.slot(i, k);
                let l = self.data[sik] / pivot;
                if l == 0.0 {
                    continue;
                }
                self.data[sik] = l;
                for j in k + 1..=last {
                    let skj = self.slot(k, j);
                    let sij = self.slot(i, j);
                    self.data[sij] -= l * self.data[skj];
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert!(self.factored, "banded matrix must be factored before solving");
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let first = i.saturating_sub(bw);
            let mut acc = x[i];
            for j in first..i {
                acc -= self.data[self.slot(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let last = (i + bw).min(n - 1);
            let mut acc = x[i];
            for j in i + 1..=last {
                acc -= self.data[self.slot(i, j)] * x[j];
            }
            x[i] = acc / self.data[self.slot(i, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve_matches_forward_product() {
        let n = 6;
        let mut m = BandedMatrix::zeros(n, 1);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            m.add(i, i, 4.0 + i as f64);
            dense[i][i] = 4.0 + i as f64;
            if i + 1 < n {
                m.add(i, i + 1, -1.0);
                m.add(i + 1, i, -1.5);
                dense[i][i + 1] = -1.0;
                dense[i + 1][i] = -1.5;
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let mut b: Vec<f64> = dense
            .iter()
            .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect();
        m.factor().unwrap();
        m.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_rows_pass_values_through() {
        let mut m = BandedMatrix::zeros(3, 1);
        for i in 0..3 {
            m.add(i, i, 3.0);
        }
        m.add(1, 0, -1.0);
        m.add(1, 2, -1.0);
        m.set_identity_row(0);
        m.factor().unwrap();
        let mut b = vec![7.0, 1.0, 3.0];
        m.solve_in_place(&mut b);
        assert_eq!(b[0], 7.0);
        assert!((b[2] - 1.0).abs() < 1e-15);
        assert!((3.0 * b[1] - 7.0 - 1.0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_pivot_is_numeric_error() {
        let mut m = BandedMatrix::zeros(2, 1);
        assert!(m.factor().is_err());
    }
}
