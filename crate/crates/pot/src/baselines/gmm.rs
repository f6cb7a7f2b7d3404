//! Diagonal-covariance Gaussian mixture models trained by
//! expectation-maximization, the basis of the Fisher vector encoding.

use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::scalar::Real;
use crate::seed;

use super::train_codebook;

const MAX_ITERS: usize = 100;
const REL_LL_TOL: f64 = 1e-5;
/// Mixture weights below this are treated as degenerate.
const WEIGHT_FLOOR: f64 = 1e-8;
/// Variance floor as a fraction of the per-dimension data variance.
const VAR_FLOOR_FRAC: f64 = 1e-4;
/// Absolute variance floor, protecting dimensions that are constant in the
/// training data.
const VAR_FLOOR_ABS: f64 = 1e-12;
/// Posterior floor applied by the public soft-assignment API.
const POSTERIOR_FLOOR: f64 = 1e-10;

/// A K-component mixture of axis-aligned Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture<F> {
    weights: Vec<F>,
    means: Matrix<F>,
    variances: Matrix<F>,
}

impl<F: Real> GaussianMixture<F> {
    /// Wraps externally supplied parameters; weights must form a simplex
    /// (each positive, summing to 1 within 1e-9) and variances must be
    /// strictly positive.
    pub fn new(weights: Vec<F>, means: Matrix<F>, variances: Matrix<F>) -> Result<Self> {
        let k = weights.len();
        assert!(k >= 1, "mixture needs at least one component");
        assert_eq!(means.rows(), k, "means row count must equal K");
        assert_eq!(variances.rows(), k, "variances row count must equal K");
        assert_eq!(means.cols(), variances.cols(), "means/variances width");
        let sum: f64 = weights.iter().map(|w| w.as_f64()).sum();
        if (sum - 1.0).abs() > 1e-9 || weights.iter().any(|w| w.as_f64() <= 0.0) {
            return Err(Error::DegenerateComponent {
                index: weights
                    .iter()
                    .position(|w| w.as_f64() <= 0.0)
                    .unwrap_or(0),
                floor: 0.0,
            });
        }
        for (r, row) in variances.row_iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if !(v.as_f64() > 0.0) {
                    return Err(Error::NonFinite {
                        context: "mixture variances".to_string(),
                        row: r,
                        col: c,
                    });
                }
            }
        }
        Ok(GaussianMixture {
            weights,
            means,
            variances,
        })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.cols()
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn means(&self) -> &Matrix<F> {
        &self.means
    }

    pub fn variances(&self) -> &Matrix<F> {
        &self.variances
    }

    pub fn mean(&self, k: usize) -> &[F] {
        self.means.row(k)
    }

    pub fn variance(&self, k: usize) -> &[F] {
        self.variances.row(k)
    }

    /// Log of the joint density `w_k * N(x | mu_k, sigma^2_k)` per component.
    fn log_joint(&self, x: &[F]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim());
        let ln_tau = (2.0 * std::f64::consts::PI).ln();
        (0..self.k())
            .map(|k| {
                let mut acc = self.weights[k].as_f64().ln();
                for d in 0..self.dim() {
                    let var = self.variances[(k, d)].as_f64();
                    let diff = x[d].as_f64() - self.means[(k, d)].as_f64();
                    acc += -0.5 * (ln_tau + var.ln()) - 0.5 * diff * diff / var;
                }
                acc
            })
            .collect()
    }

    /// Log-density of one point under the mixture.
    pub fn log_density(&self, x: &[F]) -> f64 {
        log_sum_exp(&self.log_joint(x))
    }

    /// Total log-likelihood of a point set.
    pub fn log_likelihood(&self, points: &Matrix<F>) -> f64 {
        points.row_iter().map(|x| self.log_density(x)).sum()
    }

    /// Exact posterior responsibilities (no floor); sums to 1.
    fn posteriors_exact(&self, x: &[F]) -> Vec<f64> {
        let lj = self.log_joint(x);
        let lse = log_sum_exp(&lj);
        lj.iter().map(|l| (l - lse).exp()).collect()
    }

    /// Soft assignments with a 1e-10 floor (renormalized), guarding
    /// downstream log-domain math against exact zeros.
    pub fn posteriors(&self, x: &[F]) -> Vec<F> {
        let mut p = self.posteriors_exact(x);
        for v in &mut p {
            if *v < POSTERIOR_FLOOR {
                *v = POSTERIOR_FLOOR;
            }
        }
        let total: f64 = p.iter().sum();
        p.into_iter().map(|v| F::of_f64(v / total)).collect()
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// A trained mixture together with its log-likelihood trace (one entry per
/// EM iteration, evaluated after the M-step).
#[derive(Debug, Clone)]
pub struct GmmFit<F> {
    pub model: GaussianMixture<F>,
    pub log_likelihoods: Vec<f64>,
}

/// Trains a K-component diagonal GMM; see [`train_gmm_traced`].
pub fn train_gmm<F: Real>(points: &Matrix<F>, k: usize, seed_val: u64) -> Result<GaussianMixture<F>> {
    train_gmm_traced(points, k, seed_val).map(|fit| fit.model)
}

/// Trains a K-component diagonal GMM and returns the likelihood trace.
///
/// Initialization comes from k-means (means = centers, weights = cluster
/// fractions, variances = within-cluster variances). EM runs until the
/// relative log-likelihood change drops below 1e-5 or 100 iterations.
/// Variances are floored at 1e-4 of the per-dimension data variance. A
/// component whose weight collapses below 1e-8 is re-initialized once (on
/// the point the model explains worst); a second collapse is an error.
pub fn train_gmm_traced<F: Real>(points: &Matrix<F>, k: usize, seed_val: u64) -> Result<GmmFit<F>> {
    assert!(k >= 1, "mixture needs at least one component");
    let n_points = points.rows();
    let dim = points.cols();
    let needed = 10 * k;
    if n_points < needed {
        return Err(Error::TooFewPoints {
            k,
            needed,
            got: n_points,
        });
    }

    // Per-dimension data variance -> variance floor.
    let floor: Vec<f64> = {
        let inv_n = 1.0 / n_points as f64;
        (0..dim)
            .map(|d| {
                let mean: f64 = (0..n_points).map(|i| points[(i, d)].as_f64()).sum::<f64>() * inv_n;
                let var: f64 = (0..n_points)
                    .map(|i| {
                        let diff = points[(i, d)].as_f64() - mean;
                        diff * diff
                    })
                    .sum::<f64>()
                    * inv_n;
                (VAR_FLOOR_FRAC * var).max(VAR_FLOOR_ABS)
            })
            .collect()
    };

    // k-means initialization.
    let codebook = train_codebook(points, k, seed::derive(seed_val, "gmm-init", 0))?;
    let mut weights = vec![0.0f64; k];
    let mut means = Matrix::filled(k, dim, 0.0f64);
    let mut variances = Matrix::filled(k, dim, 0.0f64);
    {
        let assign: Vec<usize> = (0..n_points)
            .map(|i| codebook.nearest(points.row(i)))
            .collect();
        let mut counts = vec![0usize; k];
        for (i, &a) in assign.iter().enumerate() {
            counts[a] += 1;
            for d in 0..dim {
                means[(a, d)] += points[(i, d)].as_f64();
            }
        }
        for c in 0..k {
            let count = counts[c].max(1);
            for d in 0..dim {
                means[(c, d)] /= count as f64;
            }
            weights[c] = counts[c] as f64 / n_points as f64;
        }
        for (i, &a) in assign.iter().enumerate() {
            for d in 0..dim {
                let diff = points[(i, d)].as_f64() - means[(a, d)];
                variances[(a, d)] += diff * diff;
            }
        }
        for c in 0..k {
            let count = counts[c].max(1);
            for d in 0..dim {
                variances[(c, d)] = (variances[(c, d)] / count as f64).max(floor[d]);
            }
            weights[c] = weights[c].max(WEIGHT_FLOOR);
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
    }

    let mut reinitialized = vec![false; k];
    let mut trace: Vec<f64> = Vec::new();
    let mut gamma = Matrix::filled(n_points, k, 0.0f64);
    for _ in 0..MAX_ITERS {
        // E-step (exact posteriors; flooring here would break the EM
        // monotonicity guarantee).
        let model = mixture_from_f64::<F>(&weights, &means, &variances);
        let mut ll = 0.0f64;
        for i in 0..n_points {
            let lj = model.log_joint(points.row(i));
            let lse = log_sum_exp(&lj);
            ll += lse;
            for c in 0..k {
                gamma[(i, c)] = (lj[c] - lse).exp();
            }
        }

        // M-step.
        let mut collapsed: Option<usize> = None;
        let mut new_weights = vec![0.0f64; k];
        let mut new_means = Matrix::filled(k, dim, 0.0f64);
        let mut new_vars = Matrix::filled(k, dim, 0.0f64);
        for c in 0..k {
            let nk: f64 = (0..n_points).map(|i| gamma[(i, c)]).sum();
            new_weights[c] = nk / n_points as f64;
            if new_weights[c] < WEIGHT_FLOOR {
                collapsed = Some(c);
                break;
            }
            for i in 0..n_points {
                let g = gamma[(i, c)];
                for d in 0..dim {
                    new_means[(c, d)] += g * points[(i, d)].as_f64();
                }
            }
            for d in 0..dim {
                new_means[(c, d)] /= nk;
            }
            for i in 0..n_points {
                let g = gamma[(i, c)];
                for d in 0..dim {
                    let diff = points[(i, d)].as_f64() - new_means[(c, d)];
                    new_vars[(c, d)] += g * diff * diff;
                }
            }
            for d in 0..dim {
                new_vars[(c, d)] = (new_vars[(c, d)] / nk).max(floor[d]);
            }
        }

        if let Some(c) = collapsed {
            if reinitialized[c] {
                return Err(Error::DegenerateComponent {
                    index: c,
                    floor: WEIGHT_FLOOR,
                });
            }
            reinitialized[c] = true;
            // Restart the component on the point the current model explains
            // worst, with data-scale variance and an average weight.
            let worst = (0..n_points)
                .min_by(|&a, &b| {
                    model
                        .log_density(points.row(a))
                        .partial_cmp(&model.log_density(points.row(b)))
                        .expect("finite log densities")
                })
                .expect("nonempty point set");
            for d in 0..dim {
                means[(c, d)] = points[(worst, d)].as_f64();
                variances[(c, d)] = (floor[d] / VAR_FLOOR_FRAC).max(floor[d]);
            }
            weights[c] = 1.0 / k as f64;
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            continue;
        }

        weights = new_weights;
        means = new_means;
        variances = new_vars;
        trace.push(ll);
        if trace.len() >= 2 {
            let prev = trace[trace.len() - 2];
            if ((ll - prev).abs() / prev.abs().max(f64::MIN_POSITIVE)) < REL_LL_TOL {
                break;
            }
        }
    }

    Ok(GmmFit {
        model: mixture_from_f64::<F>(&weights, &means, &variances),
        log_likelihoods: trace,
    })
}

fn mixture_from_f64<F: Real>(
    weights: &[f64],
    means: &Matrix<f64>,
    variances: &Matrix<f64>,
) -> GaussianMixture<F> {
    let conv = |m: &Matrix<f64>| {
        Matrix::from_vec(
            m.rows(),
            m.cols(),
            m.data().iter().map(|&v| F::of_f64(v)).collect(),
        )
    };
    GaussianMixture {
        weights: weights.iter().map(|&w| F::of_f64(w)).collect(),
        means: conv(means),
        variances: conv(variances),
    }
}
