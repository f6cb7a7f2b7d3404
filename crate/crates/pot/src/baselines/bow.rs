//! Bag-of-visual-words encoding over temporal filters.

use crate::error::{Error, Result};
use crate::model::{DescriptorSequence, TemporalFilter};
use crate::scalar::Real;

use super::Codebook;

/// Encodes a video as concatenated per-filter word histograms.
///
/// For each filter, every frame inside it votes for its nearest codebook
/// word; the K-bin count histogram is L1-normalized. Filters are emitted in
/// the order given (pyramid order), so the output length is `K * filters`.
pub fn encode_bow<F: Real>(
    seq: &DescriptorSequence<F>,
    codebook: &Codebook<F>,
    filters: &[TemporalFilter],
) -> Result<Vec<F>> {
    if seq.dim() != codebook.dim() {
        return Err(Error::DimensionMismatch {
            context: format!("bag-of-words encoding of '{}'", seq.video_id()),
            expected: codebook.dim(),
            actual: seq.dim(),
        });
    }
    for f in filters {
        f.check_bounds(seq.frame_count())?;
    }
    // Assign each frame once; filters reuse the assignments.
    let assignments: Vec<usize> = (0..seq.frame_count())
        .map(|t| codebook.nearest(seq.frame(t)))
        .collect();

    let k = codebook.k();
    let mut out = Vec::with_capacity(k * filters.len());
    for f in filters {
        let mut hist = vec![F::zero(); k];
        for &a in &assignments[f.range0()] {
            hist[a] = hist[a] + F::one();
        }
        let norm = F::of_usize(f.len());
        for h in &mut hist {
            *h = *h / norm;
        }
        out.extend(hist);
    }
    Ok(out)
}
