//! Real nonsymmetric eigendecomposition: Householder reduction to upper
//! Hessenberg form, Francis double-shift QR to real Schur form with the
//! Schur vectors accumulated, then back-substitution on the quasi-triangular
//! factor for the eigenvectors.

#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use super::matrix::{complex_norm2, ComplexMatrix, Matrix};
use crate::error::{Error, Result};

/// Desk-scale size limit.
pub const MAX_ORDER: usize = 512;

const MAX_ITER_PER_EIGENVALUE: usize = 100;

/// Eigenvalues and unit-norm eigenvectors (one per column).
#[derive(Debug, Clone, PartialEq)]
pub struct EigPair {
    pub values: Vec<Complex64>,
    pub vectors: ComplexMatrix,
}

/// Eigendecomposition of a real square matrix.
///
/// Values are sorted by non-increasing modulus, then non-increasing real
/// part, then non-decreasing imaginary part. Each eigenvector has unit
/// Euclidean norm and its largest-modulus component real and positive.
pub fn eig_real(a: &Matrix) -> Result<EigPair> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::input(format!(
            "eig_real needs a square matrix, got {}x{}",
            n,
            a.cols()
        )));
    }
    if n == 0 || n > MAX_ORDER {
        return Err(Error::input(format!("eig_real order {n} outside 1..={MAX_ORDER}")));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::input("eig_real input contains non-finite entries"));
    }

    let mut h: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut v = vec![vec![0.0; n]; n];
    orthes(&mut h, &mut v);
    let (d, e) = hqr2(&mut h, &mut v)?;

    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut j = 0;
    while j < n {
        if e[j] == 0.0 {
            values.push(Complex64::new(d[j], 0.0));
            vectors.push((0..n).map(|i| Complex64::new(v[i][j], 0.0)).collect());
            j += 1;
        } else {
            let re: Vec<f64> = (0..n).map(|i| v[i][j]).collect();
            let im: Vec<f64> = (0..n).map(|i| v[i][j + 1]).collect();
            values.push(Complex64::new(d[j], e[j]));
            vectors.push(re.iter().zip(&im).map(|(&x, &y)| Complex64::new(x, y)).collect());
            values.push(Complex64::new(d[j + 1], e[j + 1]));
            vectors.push(re.iter().zip(&im).map(|(&x, &y)| Complex64::new(x, -y)).collect());
            j += 2;
        }
    }
    for vec in &mut vectors {
        normalize_eigenvector(vec);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| compare_eigenvalues(values[x], values[y]));
    let sorted_values: Vec<Complex64> = order.iter().map(|&k| values[k]).collect();
    let mut w = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        w.set_column(col, &vectors[k]);
    }

    let pair = EigPair {
        values: sorted_values,
        vectors: w,
    };
    let residual = max_residual(a, &pair);
    let bound = 1e-8 * a.norm_inf().max(1.0);
    if !(residual <= bound) {
        return Err(Error::numeric(format!(
            "eigenvector residual {residual:.3e} exceeds {bound:.3e}"
        )));
    }
    Ok(pair)
}

/// Ordering used for eigenvalues: modulus desc, real desc, imaginary asc.
pub fn compare_eigenvalues(a: Complex64, b: Complex64) -> std::cmp::Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(a.im.total_cmp(&b.im))
}

/// `max_j ‖A w_j − λ_j w_j‖∞`.
pub fn max_residual(a: &Matrix, pair: &EigPair) -> f64 {
    let n = a.rows();
    let ac = ComplexMatrix::from_real(a);
    let mut worst = 0.0f64;
    for (j, &lambda) in pair.values.iter().enumerate() {
        let w = pair.vectors.column(j);
        let aw = ac.matvec(&w);
        for i in 0..n {
            worst = worst.max((aw[i] - lambda * w[i]).norm());
        }
    }
    worst
}

fn normalize_eigenvector(v: &mut [Complex64]) {
    let nrm = complex_norm2(v);
    if nrm == 0.0 {
        return;
    }
    let mut best = 0;
    let mut best_mod = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mod * (1.0 + 1e-12) {
            best_mod = m;
            best = i;
        }
    }
    let phase = v[best].conj() / v[best].norm();
    for z in v.iter_mut() {
        *z = *z * phase / nrm;
    }
    v[best] = Complex64::new(v[best].re, 0.0);
}

/// Householder reduction to upper Hessenberg form; `v` receives the
/// accumulated orthogonal transformation.
fn orthes(h: &mut [Vec<f64>], v: &mut [Vec<f64>]) {
    let n = h.len();
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[i][m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[i][m - 1] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[i][j];
            }
            f /= hh;
            for i in m..=high {
                h[i][j] -= f * ort[i];
            }
        }
        for row in h.iter_mut().take(high + 1) {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * row[j];
            }
            f /= hh;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[m][m - 1] = scale * g;
    }

    for (i, row) in v.iter_mut().enumerate() {
        row.iter_mut().for_each(|x| *x = 0.0);
        row[i] = 1.0;
    }
    for m in (1..high).rev() {
        if h[m][m - 1] == 0.0 {
            continue;
        }
        for i in m + 1..=high {
            ort[i] = h[i][m - 1];
        }
        for j in m..=high {
            let mut g = 0.0;
            for i in m..=high {
                g += ort[i] * v[i][j];
            }
            // Double division avoids possible underflow.
            g = (g / ort[m]) / h[m][m - 1];
            for i in m..=high {
                v[i][j] += g * ort[i];
            }
        }
    }
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

/// Francis double-shift QR on the Hessenberg matrix `h`, accumulating Schur
/// vectors into `v`, followed by eigenvector back-substitution. On return the
/// columns of `v` hold the (unnormalised) eigenvectors; complex pairs occupy
/// two columns (real part, imaginary part). Returns real and imaginary parts
/// of the eigenvalues.
#[allow(clippy::many_single_char_names)]
fn hqr2(h: &mut [Vec<f64>], v: &mut [Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let nn = h.len();
    let mut n = nn as isize - 1;
    let low = 0isize;
    let high = nn as isize - 1;
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut t, mut w, mut x, mut y);
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[i][j].abs();
        }
    }

    macro_rules! at {
        ($i:expr, $j:expr) => {
            h[($i) as usize][($j) as usize]
        };
    }

    let mut iter = 0usize;
    let mut total_iter = 0usize;
    while n >= low {
        // Look for a single small sub-diagonal element.
        let mut l = n;
        while l > low {
            s = at!(l - 1, l - 1).abs() + at!(l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            if at!(l, l - 1).abs() <= eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One root found.
            at!(n, n) += exshift;
            d[n as usize] = at!(n, n);
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // Two roots found.
            w = at!(n, n - 1) * at!(n - 1, n);
            p = (at!(n - 1, n - 1) - at!(n, n)) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            at!(n, n) += exshift;
            at!(n - 1, n - 1) += exshift;
            x = at!(n, n);

            if q >= 0.0 {
                // Real pair.
                z = if p >= 0.0 { p + z } else { p - z };
                d[(n - 1) as usize] = x + z;
                d[n as usize] = d[(n - 1) as usize];
                if z != 0.0 {
                    d[n as usize] = x - w / z;
                }
                e[(n - 1) as usize] = 0.0;
                e[n as usize] = 0.0;
                x = at!(n, n - 1);
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;

                for j in (n - 1) as usize..nn {
                    z = h[(n - 1) as usize][j];
                    h[(n - 1) as usize][j] = q * z + p * h[n as usize][j];
                    h[n as usize][j] = q * h[n as usize][j] - p * z;
                }
                for row in h.iter_mut().take(n as usize + 1) {
                    z = row[(n - 1) as usize];
                    row[(n - 1) as usize] = q * z + p * row[n as usize];
                    row[n as usize] = q * row[n as usize] - p * z;
                }
                for row in v.iter_mut().take(high as usize + 1).skip(low as usize) {
                    z = row[(n - 1) as usize];
                    row[(n - 1) as usize] = q * z + p * row[n as usize];
                    row[n as usize] = q * row[n as usize] - p * z;
                }
            } else {
                // Complex pair.
                d[(n - 1) as usize] = x + p;
                d[n as usize] = x + p;
                e[(n - 1) as usize] = z;
                e[n as usize] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // No convergence yet; form shift.
            x = at!(n, n);
            y = 0.0;
            w = 0.0;
            if l < n {
                y = at!(n - 1, n - 1);
                w = at!(n, n - 1) * at!(n - 1, n);
            }

            // Wilkinson's original ad hoc shift.
            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    at!(i, i) -= x;
                }
                s = at!(n, n - 1).abs() + at!(n - 1, n - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }

            // Second ad hoc shift for stubborn cases.
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        at!(i, i) -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            total_iter += 1;
            if iter > MAX_ITER_PER_EIGENVALUE || total_iter > MAX_ITER_PER_EIGENVALUE * nn {
                return Err(Error::numeric(format!(
                    "QR iteration did not converge for eigenvalue {n}"
                )));
            }

            // Look for two consecutive small sub-diagonal elements.
            let mut m = n - 2;
            while m >= l {
                z = at!(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / at!(m + 1, m) + at!(m, m + 1);
                q = at!(m + 1, m + 1) - z - r - s;
                r = at!(m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if at!(m, m - 1).abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (at!(m - 1, m - 1).abs() + z.abs() + at!(m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in m + 2..=n {
                at!(i, i - 2) = 0.0;
                if i > m + 2 {
                    at!(i, i - 3) = 0.0;
                }
            }

            // Double QR step on rows l..=n and columns m..=n.
            let mut k = m;
            while k < n {
                let notlast = k != n - 1;
                if k != m {
                    p = at!(k, k - 1);
                    q = at!(k + 1, k - 1);
                    r = if notlast { at!(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        at!(k, k - 1) = -s * x;
                    } else if l != m {
                        at!(k, k - 1) = -at!(k, k - 1);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    // Row modification.
                    for j in k as usize..nn {
                        let (ku, k1) = (k as usize, k as usize + 1);
                        p = h[ku][j] + q * h[k1][j];
                        if notlast {
                            p += r * h[ku + 2][j];
                            h[ku + 2][j] -= p * z;
                        }
                        h[ku][j] -= p * x;
                        h[k1][j] -= p * y;
                    }
                    // Column modification.
                    let upper = n.min(k + 3) as usize;
                    let ku = k as usize;
                    for row in h.iter_mut().take(upper + 1) {
                        p = x * row[ku] + y * row[ku + 1];
                        if notlast {
                            p += z * row[ku + 2];
                            row[ku + 2] -= p * r;
                        }
                        row[ku] -= p;
                        row[ku + 1] -= p * q;
                    }
                    // Accumulate transformations.
                    for row in v.iter_mut().take(high as usize + 1).skip(low as usize) {
                        p = x * row[ku] + y * row[ku + 1];
                        if notlast {
                            p += z * row[ku + 2];
                            row[ku + 2] -= p * r;
                        }
                        row[ku] -= p;
                        row[ku + 1] -= p * q;
                    }
                }
                k += 1;
            }
        }
    }

    if norm == 0.0 {
        return Ok((d, e));
    }

    // Back-substitute to find vectors of the upper triangular form.
    for n in (0..nn as isize).rev() {
        p = d[n as usize];
        q = e[n as usize];

        if q == 0.0 {
            // Real vector.
            let mut l = n;
            at!(n, n) = 1.0;
            let mut i = n - 1;
            while i >= 0 {
                w = at!(i, i) - p;
                r = 0.0;
                for j in l..=n {
                    r += at!(i, j) * at!(j, n);
                }
                if e[i as usize] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i as usize] == 0.0 {
                        at!(i, n) = if w != 0.0 { -r / w } else { -r / (eps * norm) };
                    } else {
                        // Solve real equations.
                        x = at!(i, i + 1);
                        y = at!(i + 1, i);
                        q = (d[i as usize] - p) * (d[i as usize] - p) + e[i as usize] * e[i as usize];
                        t = (x * s - z * r) / q;
                        at!(i, n) = t;
                        at!(i + 1, n) = if x.abs() > z.abs() {
                            (-r - w * t) / x
                        } else {
                            (-s - y * t) / z
                        };
                    }
                    // Overflow control.
                    t = at!(i, n).abs();
                    if (eps * t) * t > 1.0 {
                        for j in i..=n {
                            at!(j, n) /= t;
                        }
                    }
                }
                i -= 1;
            }
        } else if q < 0.0 {
            // Complex vector; the last component is chosen imaginary so the
            // system is triangular.
            let mut l = n - 1;
            if at!(n, n - 1).abs() > at!(n - 1, n).abs() {
                at!(n - 1, n - 1) = q / at!(n, n - 1);
                at!(n - 1, n) = -(at!(n, n) - p) / at!(n, n - 1);
            } else {
                let (cr, ci) = cdiv(0.0, -at!(n - 1, n), at!(n - 1, n - 1) - p, q);
                at!(n - 1, n - 1) = cr;
                at!(n - 1, n) = ci;
            }
            at!(n, n - 1) = 0.0;
            at!(n, n) = 1.0;
            let mut i = n - 2;
            while i >= 0 {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=n {
                    ra += at!(i, j) * at!(j, n - 1);
                    sa += at!(i, j) * at!(j, n);
                }
                w = at!(i, i) - p;

                if e[i as usize] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i as usize] == 0.0 {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        at!(i, n - 1) = cr;
                        at!(i, n) = ci;
                    } else {
                        // Solve complex equations.
                        x = at!(i, i + 1);
                        y = at!(i + 1, i);
                        let dp = d[i as usize] - p;
                        let mut vr = dp * dp + e[i as usize] * e[i as usize] - q * q;
                        let vi = dp * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = eps * norm * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) = cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                        at!(i, n - 1) = cr;
                        at!(i, n) = ci;
                        if x.abs() > z.abs() + q.abs() {
                            at!(i + 1, n - 1) = (-ra - w * at!(i, n - 1) + q * at!(i, n)) / x;
                            at!(i + 1, n) = (-sa - w * at!(i, n) - q * at!(i, n - 1)) / x;
                        } else {
                            let (cr, ci) = cdiv(-r - y * at!(i, n - 1), -s - y * at!(i, n), z, q);
                            at!(i + 1, n - 1) = cr;
                            at!(i + 1, n) = ci;
                        }
                    }
                    // Overflow control.
                    t = at!(i, n - 1).abs().max(at!(i, n).abs());
                    if (eps * t) * t > 1.0 {
                        for j in i..=n {
                            at!(j, n - 1) /= t;
                            at!(j, n) /= t;
                        }
                    }
                }
                i -= 1;
            }
        }
    }

    // Back transformation to eigenvectors of the original matrix.
    for j in (low as usize..nn).rev() {
        for row in v.iter_mut().take(high as usize + 1).skip(low as usize) {
            let mut acc = 0.0;
            for k in low as usize..=j.min(high as usize) {
                acc += row[k] * h[k][j];
            }
            row[j] = acc;
        }
    }

    Ok((d, e))
}
