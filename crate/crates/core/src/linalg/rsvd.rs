use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::Matrix;
use super::qr::HouseholderQr;
use super::svd::{apply_sign_convention, thin_svd, SvdFactors};
use crate::error::{Error, Result};

/// Randomized range-finder SVD with `power_iters` rounds of subspace iteration.
///
/// The Gaussian test matrix is drawn from a ChaCha8 stream seeded with
/// `seed`, so repeated calls with the same arguments are bit-identical.
pub fn randomized_svd(m: &Matrix, r: usize, oversample: usize, power_iters: usize, seed: u64) -> Result<SvdFactors> {
    let (rows, cols) = m.shape();
    let sketch = r + oversample;
    if r == 0 || sketch > rows.min(cols) {
        return Err(Error::input(format!(
            "randomized_svd: rank {r} + oversample {oversample} must be in 1..={}",
            rows.min(cols)
        )));
    }
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::input("randomized_svd input contains non-finite entries"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = Matrix::from_fn(cols, sketch, |_, _| StandardNormal.sample(&mut rng));

    let mut q = orthonormal_basis(&m.matmul(&omega));
    for _ in 0..power_iters {
        let z = orthonormal_basis(&m.t_matmul(&q));
        q = orthonormal_basis(&m.matmul(&z));
    }

    // B = Qᵀ M is sketch × cols; factor it and lift the left vectors.
    let b = q.t_matmul(m);
    let small = thin_svd(&b)?;
    let mut u = q.matmul(&small.u);
    let mut v = small.v;
    apply_sign_convention(&mut u, &mut v);
    let full = SvdFactors {
        u,
        sigma: small.sigma,
        v,
        rank_used: small.rank_used,
    };
    Ok(full.truncate(r))
}

fn orthonormal_basis(a: &Matrix) -> Matrix {
    HouseholderQr::new(a).thin_q()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_recovered_without_oversampling() {
        let f = randomized_svd(&Matrix::identity(4), 4, 0, 0, 7).unwrap();
        for s in &f.sigma {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sketch_larger_than_matrix_is_rejected() {
        assert!(randomized_svd(&Matrix::identity(4), 3, 2, 1, 0).is_err());
        assert!(randomized_svd(&Matrix::identity(4), 0, 0, 1, 0).is_err());
    }
}
