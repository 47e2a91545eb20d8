use num_complex::Complex64;

use super::matrix::{ComplexMatrix, Matrix};
use super::svd::{pseudoinverse_apply, thin_svd};
use crate::error::{Error, Result};

/// Complex least-squares solution and its conditioning notice.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<Complex64>,
    /// Effective rank of the real embedding (twice the complex rank).
    pub embedded_rank: usize,
    /// Set when singular values fell under the drop tolerance; the solution
    /// is then the minimum-norm minimiser.
    pub rank_deficient: bool,
}

/// Minimises `‖Ψ b − y‖₂` over complex `b` for real `y`.
///
/// Solved through the real embedding `[[Re Ψ, −Im Ψ], [Im Ψ, Re Ψ]]`, whose
/// truncated pseudoinverse yields the minimum-norm complex minimiser.
pub fn complex_least_squares(psi: &ComplexMatrix, y: &[f64]) -> Result<LeastSquares> {
    let (n, r) = (psi.rows(), psi.cols());
    if n != y.len() {
        return Err(Error::input(format!(
            "least squares: {n} rows but right-hand side of length {}",
            y.len()
        )));
    }
    if r == 0 || r > n {
        return Err(Error::input(format!(
            "least squares needs 1 <= columns <= rows, got {n}x{r}"
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("least squares right-hand side is not finite"));
    }

    let mut embed = Matrix::zeros(2 * n, 2 * r);
    for i in 0..n {
        for j in 0..r {
            let z = psi[(i, j)];
            embed[(i, j)] = z.re;
            embed[(i, j + r)] = -z.im;
            embed[(i + n, j)] = z.im;
            embed[(i + n, j + r)] = z.re;
        }
    }
    let mut rhs = vec![0.0; 2 * n];
    rhs[..n].copy_from_slice(y);

    let f = thin_svd(&embed)?;
    let x = pseudoinverse_apply(&f, &rhs)?;
    let solution = (0..r).map(|j| Complex64::new(x[j], x[j + r])).collect();
    Ok(LeastSquares {
        solution,
        embedded_rank: f.rank_used,
        rank_deficient: f.rank_used < 2 * r,
    })
}
