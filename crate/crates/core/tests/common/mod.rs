#![allow(dead_code)]

use cdmd_core::linalg::svd;
use cdmd_core::{CompartmentLayout, Matrix, SnapshotMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `P D P⁻¹` with `D` block diagonal (rotation-scaled 2×2 blocks plus one
/// negative real entry for odd `n`). Returns the matrix and its spectrum.
pub fn seeded_generator(n: usize, seed: u64) -> (Matrix, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = Matrix::zeros(n, n);
    let mut spectrum = Vec::new();
    let pairs = n / 2;
    for k in 0..pairs {
        let modulus = rng.gen_range(0.7..1.0);
        let theta = std::f64::consts::PI * (k as f64 + rng.gen_range(0.2..0.8)) / (pairs as f64 + 1.0);
        let (re, im) = (modulus * theta.cos(), modulus * theta.sin());
        let i = 2 * k;
        d.row_mut(i)[i] = re;
        d.row_mut(i)[i + 1] = -im;
        d.row_mut(i + 1)[i] = im;
        d.row_mut(i + 1)[i + 1] = re;
        spectrum.push(Complex64::new(re, im));
        spectrum.push(Complex64::new(re, -im));
    }
    if n % 2 == 1 {
        let v = rng.gen_range(-0.9..-0.5);
        d.row_mut(n - 1)[n - 1] = v;
        spectrum.push(Complex64::new(v, 0.0));
    }
    let p = Matrix::from_fn(
        n,
        n,
        |i, j| if i == j { 1.0 } else { 0.0 } + 0.3 * rng.gen_range(-1.0..1.0),
    );
    let f = svd(&p).unwrap();
    let mut v_sinv = f.v.clone();
    v_sinv.scale_columns(&f.sigma.iter().map(|s| 1.0 / s).collect::<Vec<_>>());
    let p_inv = v_sinv.matmul(&f.u.transpose());
    (p.matmul(&d).matmul(&p_inv), spectrum)
}

/// Random column-stochastic matrix with entries bounded away from zero.
pub fn markov(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Matrix::from_fn(n, n, |_, _| rng.gen_range(0.05..1.0));
    for j in 0..n {
        let total: f64 = (0..n).map(|i| a[(i, j)]).sum();
        for i in 0..n {
            a.row_mut(i)[j] /= total;
        }
    }
    a
}

/// `cols` iterates of `a` from `u0`.
pub fn iterate(a: &Matrix, u0: Vec<f64>, cols: usize) -> Matrix {
    let mut columns = vec![u0];
    while columns.len() < cols {
        let next = a.matvec(columns.last().unwrap());
        columns.push(next);
    }
    Matrix::from_columns(&columns).unwrap()
}

pub fn snapshots(data: Matrix, layout: &str) -> SnapshotMatrix {
    let layout = CompartmentLayout::parse(layout).unwrap();
    SnapshotMatrix::new(data, 1.0, layout, 1.0).unwrap()
}

pub fn column_sums(m: &Matrix) -> Vec<f64> {
    (0..m.cols()).map(|j| m.column(j).iter().sum()).collect()
}
