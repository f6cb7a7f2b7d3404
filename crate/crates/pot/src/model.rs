//! Shared data model: descriptor sequences, temporal filters, pyramid
//! construction, and pooling-operator bookkeeping.
//!
//! A video channel is an `m x n` matrix of per-frame descriptor values; each
//! of the `n` columns is read as a time series over the `m` frames. Frame
//! indices are 1-based everywhere in this crate.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::scalar::Real;

/// Per-frame descriptors of one video channel, interpreted as `dim()`
/// parallel time series of length `frame_count()`.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSequence<F> {
    video_id: String,
    channel: String,
    values: Matrix<F>,
}

impl<F: Real> DescriptorSequence<F> {
    /// Wraps an `m x n` matrix. Rejects empty matrices and non-finite values.
    pub fn new(
        video_id: impl Into<String>,
        channel: impl Into<String>,
        values: Matrix<F>,
    ) -> Result<Self> {
        if values.rows() == 0 {
            return Err(Error::EmptySequence);
        }
        if values.cols() == 0 {
            return Err(Error::ZeroDimension);
        }
        let video_id = video_id.into();
        for (r, row) in values.row_iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        context: format!("descriptor sequence '{video_id}'"),
                        row: r,
                        col: c,
                    });
                }
            }
        }
        Ok(DescriptorSequence {
            video_id,
            channel: channel.into(),
            values,
        })
    }

    pub fn from_rows(
        video_id: impl Into<String>,
        channel: impl Into<String>,
        rows: Vec<Vec<F>>,
    ) -> Result<Self> {
        let m = Matrix::from_rows(&rows).ok_or(Error::ZeroDimension)?;
        Self::new(video_id, channel, m)
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn channel(&self) -> &str {
        &self.channel
    }

    /// Number of frames `m`.
    pub fn frame_count(&self) -> usize {
        self.values.rows()
    }

    /// Descriptor dimensionality `n`.
    pub fn dim(&self) -> usize {
        self.values.cols()
    }

    /// Row `t0` (0-based frame index).
    pub fn frame(&self, t0: usize) -> &[F] {
        self.values.row(t0)
    }

    pub fn frames(&self) -> impl Iterator<Item = &[F]> {
        self.values.row_iter()
    }

    /// Copy of the time series for descriptor dimension `i`.
    pub fn series(&self, i: usize) -> Vec<F> {
        (0..self.frame_count()).map(|t| self.values[(t, i)]).collect()
    }

    pub fn value(&self, t0: usize, i: usize) -> F {
        self.values[(t0, i)]
    }

    pub fn values(&self) -> &Matrix<F> {
        &self.values
    }

    /// L1-normalizes every row in place; all-zero rows stay zero.
    pub fn l1_normalize_rows(&mut self) {
        for t in 0..self.values.rows() {
            let row = self.values.row_mut(t);
            let norm: F = row.iter().map(|v| v.abs()).sum();
            if norm > F::zero() {
                for v in row.iter_mut() {
                    *v = *v / norm;
                }
            }
        }
    }

    /// True when every row has absolute sum 1 within `tol`, or is all zero.
    pub fn rows_l1_normalized(&self, tol: F) -> bool {
        self.values.row_iter().all(|row| {
            let norm: F = row.iter().map(|v| v.abs()).sum();
            norm == F::zero() || (norm - F::one()).abs() <= tol
        })
    }
}

/// Closed frame interval `[start, end]`, 1-based inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TemporalFilter {
    start: usize,
    end: usize,
}

impl TemporalFilter {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start < 1 || end < start {
            return Err(Error::InvalidFilter { start, end });
        }
        Ok(TemporalFilter { start, end })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false // start <= end is enforced at construction
    }

    pub fn check_bounds(&self, frames: usize) -> Result<()> {
        if self.end > frames {
            return Err(Error::FilterOutOfBounds {
                start: self.start,
                end: self.end,
                frames,
            });
        }
        Ok(())
    }

    /// 0-based half-open range over a backing slice.
    pub fn range0(&self) -> std::ops::Range<usize> {
        self.start - 1..self.end
    }
}

impl fmt::Display for TemporalFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Hierarchical filter bank: level `l` splits `[1, m]` into `2^(l-1)`
/// contiguous segments, so `levels` levels give `2^levels - 1` filters,
/// ordered level-major then left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalPyramid {
    levels: usize,
    frame_count: usize,
    filters: Vec<TemporalFilter>,
}

impl TemporalPyramid {
    /// Builds the pyramid for a video of `frame_count` frames.
    ///
    /// Segment `j` of a level with `p` parts covers
    /// `[floor((j-1)*m/p) + 1, floor(j*m/p)]`; this floor split assigns every
    /// frame to exactly one segment per level. Levels whose part count
    /// exceeds `frame_count` would produce an empty segment and are rejected.
    pub fn build(levels: usize, frame_count: usize) -> Result<Self> {
        assert!(levels >= 1, "pyramid needs at least one level");
        assert!(frame_count >= 1, "pyramid needs at least one frame");
        for level in 1..=levels {
            let segments = 1usize << (level - 1);
            if segments > frame_count {
                return Err(Error::InfeasiblePyramidLevel {
                    level,
                    segments,
                    frames: frame_count,
                });
            }
        }
        let mut filters = Vec::with_capacity((1usize << levels) - 1);
        for level in 1..=levels {
            let parts = 1usize << (level - 1);
            for j in 1..=parts {
                let start = (j - 1) * frame_count / parts + 1;
                let end = j * frame_count / parts;
                filters.push(TemporalFilter::new(start, end)?);
            }
        }
        Ok(TemporalPyramid {
            levels,
            frame_count,
            filters,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    pub fn filters(&self) -> &[TemporalFilter] {
        &self.filters
    }

    pub fn filter_count(&self) -> usize {
        self.filters.len()
    }

    /// The contiguous slice of filters belonging to one level (1-based).
    pub fn level_filters(&self, level: usize) -> &[TemporalFilter] {
        assert!(level >= 1 && level <= self.levels);
        let start = (1usize << (level - 1)) - 1;
        let len = 1usize << (level - 1);
        &self.filters[start..start + len]
    }
}

/// Free-function form of [`TemporalPyramid::build`].
pub fn build_pyramid(levels: usize, frame_count: usize) -> Result<TemporalPyramid> {
    TemporalPyramid::build(levels, frame_count)
}

/// One of the four pooling operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoolingOperator {
    Sum,
    Max,
    /// Counts of positive and negative frame-to-frame differences.
    Grad1,
    /// Sums of positive and of negative difference magnitudes.
    Grad2,
}

impl PoolingOperator {
    pub const ALL: [PoolingOperator; 4] = [
        PoolingOperator::Sum,
        PoolingOperator::Max,
        PoolingOperator::Grad1,
        PoolingOperator::Grad2,
    ];

    /// Number of output values: gradient operators emit a (positive,
    /// negative) pair, sum and max a single value.
    pub fn width(self) -> usize {
        match self {
            PoolingOperator::Sum | PoolingOperator::Max => 1,
            PoolingOperator::Grad1 | PoolingOperator::Grad2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PoolingOperator::Sum => "sum",
            PoolingOperator::Max => "max",
            PoolingOperator::Grad1 => "d1",
            PoolingOperator::Grad2 => "d2",
        }
    }
}

impl fmt::Display for PoolingOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PoolingOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sum" => Ok(PoolingOperator::Sum),
            "max" => Ok(PoolingOperator::Max),
            "d1" => Ok(PoolingOperator::Grad1),
            "d2" => Ok(PoolingOperator::Grad2),
            other => Err(Error::UnknownOperator(other.to_string())),
        }
    }
}

/// Ordered, duplicate-free, non-empty selection of pooling operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorSet {
    ops: Vec<PoolingOperator>,
}

impl OperatorSet {
    pub fn new(ops: impl Into<Vec<PoolingOperator>>) -> Result<Self> {
        let ops = ops.into();
        if ops.is_empty() {
            return Err(Error::EmptyOperatorSet);
        }
        for (i, op) in ops.iter().enumerate() {
            if ops[..i].contains(op) {
                return Err(Error::DuplicateOperator(op.name().to_string()));
            }
        }
        Ok(OperatorSet { ops })
    }

    /// All four operators in canonical order: sum, max, d1, d2.
    pub fn all() -> Self {
        OperatorSet {
            ops: PoolingOperator::ALL.to_vec(),
        }
    }

    /// Parses a comma-separated list such as `"sum,max,d1,d2"`.
    pub fn parse_csv(s: &str) -> Result<Self> {
        let ops = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::new(ops)
    }

    pub fn to_csv(&self) -> String {
        self.ops
            .iter()
            .map(|o| o.name())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn ops(&self) -> &[PoolingOperator] {
        &self.ops
    }

    pub fn iter(&self) -> impl Iterator<Item = PoolingOperator> + '_ {
        self.ops.iter().copied()
    }

    /// Total values emitted per (series, filter) pair.
    pub fn width(&self) -> usize {
        self.ops.iter().map(|o| o.width()).sum()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Length of the pooled vector: `dim * filter_count * ops.width()`.
pub fn pot_dimension(dim: usize, filter_count: usize, ops: &OperatorSet) -> usize {
    dim * filter_count * ops.width()
}
