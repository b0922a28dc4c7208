//! Special functions used by the variational updates.

use crate::error::{Error, Result};

// B_{2k} / (2k) for k = 1..7
const ASYMPTOTIC: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// Digamma ψ(x) for x > 0.
///
/// Shifts x above 10 with ψ(x) = ψ(x + 1) − 1/x, then sums the asymptotic
/// series ψ(x) ≈ ln x − 1/(2x) − Σ B_{2k} / (2k x^{2k}). Absolute error is
/// below 1e-14 over the positive axis.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "digamma domain: {x}");
    let mut acc = 0.0;
    let mut z = x;
    while z < 10.0 {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in ASYMPTOTIC {
        series += c * pow;
        pow *= inv2;
    }
    acc + z.ln() - 0.5 / z - series
}

/// Checked digamma; rejects non-positive and non-finite arguments.
pub fn try_digamma(x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(digamma(x))
    } else {
        Err(Error::Numerical(format!("digamma undefined at {x}")))
    }
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}
