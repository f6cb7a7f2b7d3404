//! Fisher vector encoding of descriptor sequences under a diagonal GMM,
//! with the "improved" post-processing (signed square root, then L2
//! normalization) applied per temporal-filter block.

use crate::error::{Error, Result};
use crate::model::{DescriptorSequence, TemporalFilter};
use crate::scalar::Real;

use super::GaussianMixture;

fn check_dims<F: Real>(seq: &DescriptorSequence<F>, gmm: &GaussianMixture<F>) -> Result<()> {
    if seq.dim() != gmm.dim() {
        return Err(Error::DimensionMismatch {
            context: format!("Fisher encoding of '{}'", seq.video_id()),
            expected: gmm.dim(),
            actual: seq.dim(),
        });
    }
    Ok(())
}

/// Unnormalized Fisher vector of the frames inside one filter.
///
/// With T frames, soft assignments γ_t(k), and per-component weight w_k,
/// mean μ_k, deviation σ_k, the output stacks K mean-gradient blocks then K
/// variance-gradient blocks (2·K·n values):
///
/// ```text
/// G_μk = (1 / (T √w_k))    Σ_t γ_t(k) (x_t − μ_k) / σ_k
/// G_σk = (1 / (T √(2 w_k))) Σ_t γ_t(k) [((x_t − μ_k) / σ_k)² − 1]
/// ```
pub fn fisher_vector<F: Real>(
    seq: &DescriptorSequence<F>,
    gmm: &GaussianMixture<F>,
    filter: TemporalFilter,
) -> Result<Vec<F>> {
    check_dims(seq, gmm)?;
    filter.check_bounds(seq.frame_count())?;
    let (k, n) = (gmm.k(), gmm.dim());
    let t_count = filter.len() as f64;

    // Per-component standard deviations, precomputed once.
    let sd: Vec<Vec<f64>> = (0..k)
        .map(|c| gmm.variance(c).iter().map(|v| v.as_f64().sqrt()).collect())
        .collect();

    let mut g_mean = vec![0.0f64; k * n];
    let mut g_var = vec![0.0f64; k * n];
    for t0 in filter.range0() {
        let x = seq.frame(t0);
        let gamma = gmm.posteriors(x);
        for c in 0..k {
            let g = gamma[c].as_f64();
            let mu = gmm.mean(c);
            for d in 0..n {
                let z = (x[d].as_f64() - mu[d].as_f64()) / sd[c][d];
                g_mean[c * n + d] += g * z;
                g_var[c * n + d] += g * (z * z - 1.0);
            }
        }
    }

    let mut out = Vec::with_capacity(2 * k * n);
    for c in 0..k {
        let scale = 1.0 / (t_count * gmm.weights()[c].as_f64().sqrt());
        for d in 0..n {
            out.push(F::of_f64(g_mean[c * n + d] * scale));
        }
    }
    for c in 0..k {
        let scale = 1.0 / (t_count * (2.0 * gmm.weights()[c].as_f64()).sqrt());
        for d in 0..n {
            out.push(F::of_f64(g_var[c * n + d] * scale));
        }
    }
    Ok(out)
}

/// Signed square root followed by L2 normalization, in place; an all-zero
/// block stays zero.
fn improve<F: Real>(block: &mut [F]) {
    for v in block.iter_mut() {
        *v = v.signum() * v.abs().sqrt();
    }
    let norm = block
        .iter()
        .map(|v| *v * *v)
        .fold(F::zero(), |a, b| a + b)
        .sqrt();
    if norm > F::zero() {
        for v in block.iter_mut() {
            *v = *v / norm;
        }
    }
}

/// Improved Fisher vector over a filter bank: one processed 2·K·n block per
/// filter, concatenated in filter order (total 2·K·n·|filters|).
pub fn encode_ifv<F: Real>(
    seq: &DescriptorSequence<F>,
    gmm: &GaussianMixture<F>,
    filters: &[TemporalFilter],
) -> Result<Vec<F>> {
    let mut out = Vec::with_capacity(2 * gmm.k() * gmm.dim() * filters.len());
    for &f in filters {
        let mut block = fisher_vector(seq, gmm, f)?;
        improve(&mut block);
        out.extend(block);
    }
    Ok(out)
}
