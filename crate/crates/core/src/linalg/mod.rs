//! Dense real/complex linear algebra sized for desk-scale DMD: a few thousand
//! rows, a few hundred columns.

mod eig;
mod lstsq;
mod matrix;
mod qr;
mod rsvd;
mod svd;

pub use eig::{compare_eigenvalues, eig_real, max_residual, EigPair, MAX_ORDER};
pub use lstsq::{complex_least_squares, LeastSquares};
pub use matrix::{complex_norm2, dot, norm2, ComplexMatrix, Matrix};
pub use rsvd::randomized_svd;
pub use svd::{pseudoinverse_apply, retained_rank, svd, truncated_svd, SvdFactors, DROP_TOLERANCE, MAX_SWEEPS};
