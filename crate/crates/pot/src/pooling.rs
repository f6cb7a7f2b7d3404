//! Pooling operators over temporal filters, and assembly of pooled
//! time-series (PoT) feature vectors.
//!
//! Each descriptor dimension of a video is a time series `f(1..=m)`. A
//! temporal filter `[t_s, t_e]` selects a sub-interval, and an operator
//! reduces it to one value (sum, max) or a (positive, negative) pair
//! (first/second gradient). The PoT vector concatenates these values for
//! every series, filter, and operator.

use crate::error::{Error, Result};
use crate::model::{
    DescriptorSequence, OperatorSet, PoolingOperator, TemporalFilter, TemporalPyramid,
    pot_dimension,
};
use crate::scalar::Real;

/// Sum of `f(t)` for `t` in the filter.
pub fn pool_sum<F: Real>(series: &[F], filter: TemporalFilter) -> Result<F> {
    filter.check_bounds(series.len())?;
    Ok(series[filter.range0()].iter().copied().sum())
}

/// Maximum of `f(t)` for `t` in the filter.
pub fn pool_max<F: Real>(series: &[F], filter: TemporalFilter) -> Result<F> {
    filter.check_bounds(series.len())?;
    let mut best = series[filter.start() - 1];
    for &v in &series[filter.range0()] {
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// Iterates the frame-to-frame differences `f(t) - f(t-1)` attributed to the
/// filter: `t` runs over `max(t_s, 2)..=t_e`, so the first difference may
/// reach one frame before the filter, and `t = 1` (which has no predecessor)
/// contributes nothing.
fn gradient_diffs<F: Real>(
    series: &[F],
    filter: TemporalFilter,
) -> impl Iterator<Item = F> + '_ {
    let first = filter.start().max(2);
    (first..=filter.end()).map(move |t| series[t - 1] - series[t - 2])
}

/// Counts of strictly positive and strictly negative frame-to-frame
/// differences over the filter. Zero differences count toward neither.
pub fn pool_grad1<F: Real>(series: &[F], filter: TemporalFilter) -> Result<(F, F)> {
    filter.check_bounds(series.len())?;
    let mut pos = F::zero();
    let mut neg = F::zero();
    for d in gradient_diffs(series, filter) {
        if d > F::zero() {
            pos = pos + F::one();
        } else if d < F::zero() {
            neg = neg + F::one();
        }
    }
    Ok((pos, neg))
}

/// Summed magnitudes of positive and of negative frame-to-frame differences
/// over the filter; both components are non-negative.
pub fn pool_grad2<F: Real>(series: &[F], filter: TemporalFilter) -> Result<(F, F)> {
    filter.check_bounds(series.len())?;
    let mut pos = F::zero();
    let mut neg = F::zero();
    for d in gradient_diffs(series, filter) {
        if d > F::zero() {
            pos = pos + d;
        } else if d < F::zero() {
            neg = neg - d;
        }
    }
    Ok((pos, neg))
}

/// Which half of a gradient pair a component belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientSign {
    Positive,
    Negative,
}

/// Provenance of one PoT component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PotSlot {
    /// Descriptor dimension (series index), 0-based.
    pub series: usize,
    /// Index into the pyramid's filter list.
    pub filter_index: usize,
    pub filter: TemporalFilter,
    pub op: PoolingOperator,
    /// `Some` for gradient operators, `None` for sum and max.
    pub sign: Option<GradientSign>,
}

/// Assembled PoT vector together with the layout that produced it.
///
/// Component order is series-major: all values for series 0 (filter-major,
/// then operator order, gradients emitting positive before negative), then
/// series 1, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct PotVector<F> {
    data: Vec<F>,
    dim: usize,
    filters: Vec<TemporalFilter>,
    ops: OperatorSet,
}

impl<F: Real> PotVector<F> {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn into_data(self) -> Vec<F> {
        self.data
    }

    /// Descriptor dimensionality of the source sequence.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn filters(&self) -> &[TemporalFilter] {
        &self.filters
    }

    pub fn ops(&self) -> &OperatorSet {
        &self.ops
    }

    /// Values emitted per (series, filter) pair.
    fn ops_width(&self) -> usize {
        self.ops.width()
    }

    /// Decodes which series, filter, and operator produced component `index`.
    pub fn slot(&self, index: usize) -> PotSlot {
        assert!(index < self.data.len(), "component index out of range");
        let per_series = self.filters.len() * self.ops_width();
        let series = index / per_series;
        let within = index % per_series;
        let filter_index = within / self.ops_width();
        let mut offset = within % self.ops_width();
        for op in self.ops.iter() {
            if offset < op.width() {
                let sign = match (op, offset) {
                    (PoolingOperator::Sum | PoolingOperator::Max, _) => None,
                    (_, 0) => Some(GradientSign::Positive),
                    (_, _) => Some(GradientSign::Negative),
                };
                return PotSlot {
                    series,
                    filter_index,
                    filter: self.filters[filter_index],
                    op,
                    sign,
                };
            }
            offset -= op.width();
        }
        unreachable!("offset exhausts operator widths");
    }

    /// Copy rescaled to unit L1 norm; an all-zero vector is returned as is.
    pub fn l1_normalized(&self) -> PotVector<F> {
        let norm: F = self.data.iter().map(|v| v.abs()).sum();
        let mut out = self.clone();
        if norm > F::zero() {
            for v in &mut out.data {
                *v = *v / norm;
            }
        }
        out
    }
}

/// Pools every descriptor dimension of `seq` over every pyramid filter with
/// every operator. The pyramid must have been built for `seq`'s frame count.
pub fn build_pot<F: Real>(
    seq: &DescriptorSequence<F>,
    pyramid: &TemporalPyramid,
    ops: &OperatorSet,
) -> Result<PotVector<F>> {
    if pyramid.frame_count() != seq.frame_count() {
        return Err(Error::DimensionMismatch {
            context: format!("pyramid built for video '{}'", seq.video_id()),
            expected: seq.frame_count(),
            actual: pyramid.frame_count(),
        });
    }
    let filters = pyramid.filters();
    let mut data = Vec::with_capacity(pot_dimension(seq.dim(), filters.len(), ops));
    let mut series = vec![F::zero(); seq.frame_count()];
    for i in 0..seq.dim() {
        for (t, slot) in series.iter_mut().enumerate() {
            *slot = seq.value(t, i);
        }
        for &filter in filters {
            for op in ops.iter() {
                match op {
                    PoolingOperator::Sum => data.push(pool_sum(&series, filter)?),
                    PoolingOperator::Max => data.push(pool_max(&series, filter)?),
                    PoolingOperator::Grad1 => {
                        let (p, n) = pool_grad1(&series, filter)?;
                        data.push(p);
                        data.push(n);
                    }
                    PoolingOperator::Grad2 => {
                        let (p, n) = pool_grad2(&series, filter)?;
                        data.push(p);
                        data.push(n);
                    }
                }
            }
        }
    }
    Ok(PotVector {
        data,
        dim: seq.dim(),
        filters: filters.to_vec(),
        ops: ops.clone(),
    })
}
