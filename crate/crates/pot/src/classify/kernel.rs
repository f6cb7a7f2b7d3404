//! The exponential multi-channel χ² kernel:
//! `K(x, y) = exp(−Σ_c D_c(x_c, y_c) / γ_c)`, where `D_c` is the χ²
//! distance on channel `c` and `γ_c` is the mean training-pair distance of
//! that channel.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::scalar::Real;

use super::{chi2_distance, chi2_distance_abs};

/// Symmetry tolerance for [`KernelMatrix`] validation.
const SYMMETRY_TOL: f64 = 1e-9;

/// A validated N×N training kernel: symmetric within 1e-9 with unit
/// diagonal, plus the per-channel γ values that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    values: Matrix<f64>,
    gammas: Vec<f64>,
}

impl KernelMatrix {
    pub fn new(values: Matrix<f64>, gammas: Vec<f64>) -> Result<Self> {
        assert_eq!(values.rows(), values.cols(), "kernel matrix must be square");
        for i in 0..values.rows() {
            let diag = values[(i, i)];
            if (diag - 1.0).abs() > SYMMETRY_TOL {
                return Err(Error::KernelDiagonal {
                    index: i,
                    value: diag,
                });
            }
            for j in i + 1..values.cols() {
                if (values[(i, j)] - values[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::AsymmetricKernel {
                        row: i,
                        col: j,
                        a: values[(i, j)],
                        b: values[(j, i)],
                    });
                }
            }
        }
        Ok(KernelMatrix { values, gammas })
    }

    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn values(&self) -> &Matrix<f64> {
        &self.values
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }
}

/// One kernel value between two multi-channel feature vectors.
pub fn multichannel_kernel<F: Real>(
    xs: &[Vec<F>],
    ys: &[Vec<F>],
    gammas: &[f64],
) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() != gammas.len() {
        return Err(Error::MissingChannel {
            index: xs.len().min(ys.len()).min(gammas.len()),
            count_x: xs.len(),
            count_y: ys.len(),
        });
    }
    let mut exponent = 0.0f64;
    for (c, ((x, y), &gamma)) in xs.iter().zip(ys).zip(gammas).enumerate() {
        if gamma <= 0.0 {
            return Err(Error::NonPositiveGamma { channel: c, gamma });
        }
        let d = chi2_distance(x, y)?.as_f64();
        exponent += d / gamma;
    }
    Ok((-exponent).exp())
}

/// Pairwise χ² distances over a set of equal-length feature vectors,
/// computed once per channel and reused across evaluation trials.
///
/// If any vector carries a negative entry (improved Fisher vectors do), the
/// `|x|+|y|`-denominator variant is used for the whole channel and a
/// warning is logged. Returns the matrix and whether that variant was used.
pub fn chi2_distance_matrix<F: Real>(
    vectors: &[Vec<F>],
    channel_name: &str,
) -> Result<(Matrix<f64>, bool)> {
    assert!(!vectors.is_empty(), "need at least one vector");
    let n = vectors.len();
    for v in vectors {
        if v.len() != vectors[0].len() {
            return Err(Error::DimensionMismatch {
                context: format!("feature vectors of channel '{channel_name}'"),
                expected: vectors[0].len(),
                actual: v.len(),
            });
        }
    }
    let has_negative = vectors
        .iter()
        .any(|v| v.iter().any(|x| *x < F::zero()));
    if has_negative {
        log::warn!(
            "channel '{channel_name}' has negative feature values; \
             using |x|+|y| denominators in the chi-squared distance"
        );
    }

    // Upper triangle in parallel, mirrored afterwards.
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0f64; n];
            for j in i + 1..n {
                let d = if has_negative {
                    chi2_distance_abs(&vectors[i], &vectors[j])
                } else {
                    chi2_distance(&vectors[i], &vectors[j])
                }
                .expect("equal lengths checked above");
                row[j] = d.as_f64();
            }
            row
        })
        .collect();
    let mut m = Matrix::filled(n, n, 0.0f64);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, d) in row.into_iter().enumerate().skip(i + 1) {
            m[(i, j)] = d;
            m[(j, i)] = d;
        }
    }
    Ok((m, has_negative))
}

/// Mean distance over unordered pairs of the listed indices — the γ of one
/// channel, computed on training videos only. Positive unless all listed
/// vectors coincide.
pub fn mean_pairwise_distance(distances: &Matrix<f64>, indices: &[usize]) -> f64 {
    let k = indices.len();
    if k < 2 {
        return 0.0;
    }
    let mut total = 0.0f64;
    for (a, &i) in indices.iter().enumerate() {
        for &j in &indices[a + 1..] {
            total += distances[(i, j)];
        }
    }
    total / (k * (k - 1) / 2) as f64
}

/// Assembles kernel values `exp(−Σ_c D_c[r, c̃] / γ_c)` for every (row,
/// column) index pair, from per-channel distance matrices. `rows` and
/// `cols` index into the distance matrices (e.g. training × training for
/// the Gram matrix, test × training for prediction).
pub fn kernel_from_distances(
    distances: &[Matrix<f64>],
    rows: &[usize],
    cols: &[usize],
    gammas: &[f64],
) -> Result<Matrix<f64>> {
    assert_eq!(
        distances.len(),
        gammas.len(),
        "one gamma per channel distance matrix"
    );
    for (c, &gamma) in gammas.iter().enumerate() {
        if gamma <= 0.0 {
            return Err(Error::NonPositiveGamma { channel: c, gamma });
        }
    }
    let values: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|&r| {
            cols.iter()
                .map(|&c| {
                    let exponent: f64 = distances
                        .iter()
                        .zip(gammas)
                        .map(|(d, &g)| d[(r, c)] / g)
                        .sum();
                    (-exponent).exp()
                })
                .collect()
        })
        .collect();
    Ok(Matrix::from_rows(&values).expect("rectangular by construction"))
}
