//! Small helpers for real polynomials in the delay operator `q^-1`.
//!
//! A polynomial `p0 + p1 q^-1 + ... + pn q^-n` is stored as the coefficient
//! slice `[p0, p1, ..., pn]`.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Evaluate `P(e^{-i w})` for a polynomial in `q^-1`.
pub fn eval_unit_circle(coeffs: &[f64], omega: f64) -> Complex64 {
    // Horner in z^-1 = e^{-i w}.
    let z_inv = Complex64::new(omega.cos(), -omega.sin());
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z_inv + c;
    }
    acc
}

/// Coefficient-wise product of two polynomials in `q^-1`.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Zeros of `p0 + p1 q^-1 + ... + pn q^-n` in the complex z plane,
/// computed as eigenvalues of the companion matrix of
/// `p0 z^n + p1 z^{n-1} + ... + pn`.
///
/// Leading/trailing zero coefficients are trimmed first; trailing zeros in
/// `q^-1` contribute roots at z = 0 which are kept (they are always stable).
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    // strip leading zeros of p0..: they do not affect the zeros in z
    let first = coeffs.iter().position(|&c| c != 0.0);
    let Some(first) = first else {
        return Vec::new();
    };
    let c = &coeffs[first..];
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let p0 = c[0];
    let companion = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -c[j + 1] / p0
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Largest root modulus, or 0 for constant polynomials.
pub fn max_root_modulus(coeffs: &[f64]) -> f64 {
    roots(coeffs).iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// All zeros strictly inside the unit circle, with a small numeric guard band.
pub fn is_stable(coeffs: &[f64]) -> bool {
    max_root_modulus(coeffs) < 1.0 - 1e-12
}
