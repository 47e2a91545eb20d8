use num_complex::Complex64;

use crate::error::{Error, Result};

/// `ωᵢ = ln(λᵢ)/dt` on the principal branch, `Im(ωᵢ)·dt ∈ (−π, π]`.
///
/// A zero eigenvalue maps to `ω = −∞ + 0i`, which marks a mode that has
/// fully decayed after one step (see [`is_decayed`]).
pub fn continuous_eigenvalues(lambda: &[Complex64], dt: f64) -> Result<Vec<Complex64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::input(format!("dt must be positive, got {dt}")));
    }
    Ok(lambda
        .iter()
        .map(|l| {
            if l.re == 0.0 && l.im == 0.0 {
                return Complex64::new(f64::NEG_INFINITY, 0.0);
            }
            // −0.0 imaginary parts would select −π.
            let im = if l.im == 0.0 { 0.0 } else { l.im };
            Complex64::new(l.re, im).ln() / dt
        })
        .collect())
}

/// True for the `λ = 0` sentinel produced by [`continuous_eigenvalues`].
pub fn is_decayed(omega: Complex64) -> bool {
    omega.re == f64::NEG_INFINITY
}

pub(crate) fn on_negative_real_axis(l: Complex64) -> bool {
    l.im == 0.0 && l.re <= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn real_and_imaginary_logs() {
        let w = continuous_eigenvalues(
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.1f64.exp(), 0.0),
                Complex64::new(0.0, 1.0),
            ],
            1.0,
        )
        .unwrap();
        assert_eq!(w[0], Complex64::new(0.0, 0.0));
        assert!((w[1].re - 0.1).abs() < 1e-15);
        assert!((w[2] - Complex64::new(0.0, PI / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn dt_scaling_and_branch() {
        let w = continuous_eigenvalues(&[Complex64::new(1.0, 0.0)], 0.25).unwrap();
        assert_eq!(w[0].norm(), 0.0);
        let neg = continuous_eigenvalues(&[Complex64::new(-1.0, -0.0)], 1.0).unwrap();
        assert!((neg[0].im - PI).abs() < 1e-15);
        assert!(continuous_eigenvalues(&[Complex64::new(1.0, 0.0)], 0.0).is_err());
    }

    #[test]
    fn zero_eigenvalue_is_decayed() {
        let w = continuous_eigenvalues(&[Complex64::new(0.0, 0.0)], 1.0).unwrap();
        assert!(is_decayed(w[0]));
    }
}
