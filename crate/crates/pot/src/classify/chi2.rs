//! χ² distances between feature vectors.

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_len<F>(x: &[F], y: &[F]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "chi-squared distance".to_string(),
            expected: x.len(),
            actual: y.len(),
        });
    }
    Ok(())
}

/// `D(x, y) = ½ Σ (x_i − y_i)² / (x_i + y_i)`, with zero-denominator terms
/// contributing 0. Intended for nonnegative vectors (histograms); for
/// channels that may carry negative values use [`chi2_distance_abs`].
pub fn chi2_distance<F: Real>(x: &[F], y: &[F]) -> Result<F> {
    check_len(x, y)?;
    let mut acc = F::zero();
    for (&a, &b) in x.iter().zip(y) {
        let denom = a + b;
        if denom != F::zero() {
            let d = a - b;
            acc = acc + d * d / denom;
        }
    }
    Ok(acc * F::of_f64(0.5))
}

/// χ² variant with `|x_i| + |y_i|` denominators, safe for signed features
/// (e.g. improved Fisher vectors).
pub fn chi2_distance_abs<F: Real>(x: &[F], y: &[F]) -> Result<F> {
    check_len(x, y)?;
    let mut acc = F::zero();
    for (&a, &b) in x.iter().zip(y) {
        let denom = a.abs() + b.abs();
        if denom != F::zero() {
            let d = a - b;
            acc = acc + d * d / denom;
        }
    }
    Ok(acc * F::of_f64(0.5))
}
