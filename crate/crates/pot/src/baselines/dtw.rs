//! Dynamic time warping between descriptor sequences, and 1-nearest-
//! neighbor classification on top of it.

use crate::error::{Error, Result};
use crate::model::DescriptorSequence;
use crate::scalar::Real;

fn frame_distance<F: Real>(a: &[F], b: &[F]) -> F {
    let mut acc = F::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        acc = acc + d * d;
    }
    acc.sqrt()
}

/// Classic boundary-aligned DTW with Euclidean frame distance, symmetric
/// unit-weight steps (match, insert, delete), and no band constraint.
pub fn dtw_distance<F: Real>(
    a: &DescriptorSequence<F>,
    b: &DescriptorSequence<F>,
) -> Result<F> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "DTW between '{}' and '{}'",
                a.video_id(),
                b.video_id()
            ),
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let (m, n) = (a.frame_count(), b.frame_count());
    // Rolling single-row dynamic program over the m x n alignment grid.
    let mut prev = vec![F::zero(); n];
    let mut cur = vec![F::zero(); n];
    for i in 0..m {
        for j in 0..n {
            let cost = frame_distance(a.frame(i), b.frame(j));
            let best = match (i, j) {
                (0, 0) => F::zero(),
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(cur[j - 1]).min(prev[j - 1]),
            };
            cur[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[n - 1])
}

/// 1-nearest-neighbor classification: the label of the training sequence
/// with the smallest DTW distance to `query` (ties keep the earliest entry).
/// Returns the winning label and its distance.
pub fn classify_dtw<F: Real>(
    train: &[(&DescriptorSequence<F>, usize)],
    query: &DescriptorSequence<F>,
) -> Result<(usize, F)> {
    assert!(!train.is_empty(), "1-NN needs at least one training sequence");
    let mut best_label = train[0].1;
    let mut best_d = dtw_distance(train[0].0, query)?;
    for (seq, label) in &train[1..] {
        let d = dtw_distance(seq, query)?;
        if d < best_d {
            best_d = d;
            best_label = *label;
        }
    }
    Ok((best_label, best_d))
}
