//! Dense optical flow by coarse-to-fine block matching.
//!
//! A pyramid of 2x2-mean-downsampled images (up to 3 levels, stopping before
//! either side would drop below 8 pixels) is matched coarsest first: each
//! 8x8 block searches integer displacements within +-4 pixels of its
//! initialization (zero at the coarsest level, twice the enclosing coarser
//! block's displacement below that), minimizing the mean absolute pixel
//! difference over in-bounds pixels. Ties break toward the smallest
//! displacement (then smallest dy, dx), so featureless regions and identical
//! frames report zero motion. The winning block displacements are written to
//! every pixel of the block at full resolution.

use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::scalar::Real;

use super::Frame;

/// Block side length at every pyramid level.
const BLOCK: usize = 8;
/// Search radius in pixels around the initialization, per level.
const SEARCH: i64 = 4;
/// Maximum pyramid depth.
const MAX_LEVELS: usize = 3;
/// Downsampling stops before an image side would fall below this.
const MIN_LEVEL_DIM: usize = 8;

/// Per-pixel displacement field: `u` is the x (column) component, `v` the
/// y (row) component, in pixels per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField<F> {
    u: Matrix<F>,
    v: Matrix<F>,
}

impl<F: Real> FlowField<F> {
    /// Wraps precomputed components; both must be finite and equally sized.
    pub fn new(u: Matrix<F>, v: Matrix<F>) -> Result<Self> {
        if u.rows() != v.rows() || u.cols() != v.cols() {
            return Err(Error::DimensionMismatch {
                context: "flow field components".to_string(),
                expected: u.rows() * u.cols(),
                actual: v.rows() * v.cols(),
            });
        }
        for (name, m) in [("u", &u), ("v", &v)] {
            for (r, row) in m.row_iter().enumerate() {
                for (c, val) in row.iter().enumerate() {
                    if !val.is_finite() {
                        return Err(Error::NonFinite {
                            context: format!("flow field {name} component"),
                            row: r,
                            col: c,
                        });
                    }
                }
            }
        }
        Ok(FlowField { u, v })
    }

    pub fn height(&self) -> usize {
        self.u.rows()
    }

    pub fn width(&self) -> usize {
        self.u.cols()
    }

    /// The (u, v) displacement at pixel (y, x).
    pub fn at(&self, y: usize, x: usize) -> (F, F) {
        (self.u[(y, x)], self.v[(y, x)])
    }

    pub fn u(&self) -> &Matrix<F> {
        &self.u
    }

    pub fn v(&self) -> &Matrix<F> {
        &self.v
    }
}

/// 2x2 mean downsample; odd trailing rows/columns are dropped.
fn downsample<F: Real>(m: &Matrix<F>) -> Matrix<F> {
    let h = m.rows() / 2;
    let w = m.cols() / 2;
    let quarter = F::of_f64(0.25);
    let mut out = Matrix::filled(h, w, F::zero());
    for y in 0..h {
        for x in 0..w {
            let s = m[(2 * y, 2 * x)]
                + m[(2 * y, 2 * x + 1)]
                + m[(2 * y + 1, 2 * x)]
                + m[(2 * y + 1, 2 * x + 1)];
            out[(y, x)] = s * quarter;
        }
    }
    out
}

/// Number of blocks needed to tile `size` pixels (last block may be short).
fn block_count(size: usize) -> usize {
    size.div_ceil(BLOCK)
}

/// Pixel extent of block `b` along an axis of `size` pixels.
fn block_span(b: usize, size: usize) -> (usize, usize) {
    let start = b * BLOCK;
    (start, (start + BLOCK).min(size))
}

/// Mean absolute difference between a block of `prev` and the same block of
/// `next` displaced by `(dy, dx)`, over pixels that land in bounds. `None`
/// when no pixel does.
fn block_cost<F: Real>(
    prev: &Matrix<F>,
    next: &Matrix<F>,
    ys: (usize, usize),
    xs: (usize, usize),
    dy: i64,
    dx: i64,
) -> Option<F> {
    let (h, w) = (prev.rows() as i64, prev.cols() as i64);
    let mut sum = F::zero();
    let mut count = 0usize;
    for y in ys.0..ys.1 {
        let ty = y as i64 + dy;
        if ty < 0 || ty >= h {
            continue;
        }
        for x in xs.0..xs.1 {
            let tx = x as i64 + dx;
            if tx < 0 || tx >= w {
                continue;
            }
            sum = sum + (prev[(y, x)] - next[(ty as usize, tx as usize)]).abs();
            count += 1;
        }
    }
    (count > 0).then(|| sum / F::of_usize(count))
}

/// Exhaustive +-SEARCH scan around `init`, with deterministic tie-breaking
/// by (cost, |displacement|^2, dy, dx).
fn best_displacement<F: Real>(
    prev: &Matrix<F>,
    next: &Matrix<F>,
    ys: (usize, usize),
    xs: (usize, usize),
    init: (i64, i64),
) -> (i64, i64) {
    let mut best: Option<(F, i64, i64, i64)> = None;
    for dy in init.0 - SEARCH..=init.0 + SEARCH {
        for dx in init.1 - SEARCH..=init.1 + SEARCH {
            let Some(cost) = block_cost(prev, next, ys, xs, dy, dx) else {
                continue;
            };
            let key = (cost, dy * dy + dx * dx, dy, dx);
            let better = match &best {
                None => true,
                Some(b) => {
                    (key.0, key.1, key.2, key.3) < (b.0, b.1, b.2, b.3)
                }
            };
            if better {
                best = Some(key);
            }
        }
    }
    best.map_or((0, 0), |(_, _, dy, dx)| (dy, dx))
}

/// Estimates the dense displacement field carrying `prev` onto `next`.
pub fn compute_flow<F: Real>(prev: &Frame<F>, next: &Frame<F>) -> Result<FlowField<F>> {
    if prev.height() != next.height() || prev.width() != next.width() {
        return Err(Error::FrameSizeMismatch {
            index: 1,
            expected_h: prev.height(),
            expected_w: prev.width(),
            actual_h: next.height(),
            actual_w: next.width(),
        });
    }

    // Pyramid from finest (index 0) to coarsest.
    let mut levels: Vec<(Matrix<F>, Matrix<F>)> =
        vec![(prev.pixels().clone(), next.pixels().clone())];
    while levels.len() < MAX_LEVELS {
        let (p, n) = levels.last().unwrap();
        if p.rows() / 2 < MIN_LEVEL_DIM || p.cols() / 2 < MIN_LEVEL_DIM {
            break;
        }
        levels.push((downsample(p), downsample(n)));
    }

    let mut coarser: Option<(Vec<(i64, i64)>, usize, usize)> = None;
    for (p, n) in levels.iter().rev() {
        let (h, w) = (p.rows(), p.cols());
        let (nby, nbx) = (block_count(h), block_count(w));
        let mut disp = vec![(0i64, 0i64); nby * nbx];
        for by in 0..nby {
            let ys = block_span(by, h);
            for bx in 0..nbx {
                let xs = block_span(bx, w);
                let init = match &coarser {
                    None => (0, 0),
                    Some((cdisp, cnby, cnbx)) => {
                        // Center of this block, mapped into the coarser
                        // level's block grid.
                        let cy = (ys.0 + ys.1) / 2 / 2;
                        let cx = (xs.0 + xs.1) / 2 / 2;
                        let cby = (cy / BLOCK).min(cnby - 1);
                        let cbx = (cx / BLOCK).min(cnbx - 1);
                        let (dy, dx) = cdisp[cby * cnbx + cbx];
                        (2 * dy, 2 * dx)
                    }
                };
                disp[by * nbx + bx] = best_displacement(p, n, ys, xs, init);
            }
        }
        coarser = Some((disp, nby, nbx));
    }

    let (disp, _, nbx) = coarser.expect("at least one pyramid level");
    let (h, w) = (prev.height(), prev.width());
    let mut u = Matrix::filled(h, w, F::zero());
    let mut v = Matrix::filled(h, w, F::zero());
    for y in 0..h {
        for x in 0..w {
            let (dy, dx) = disp[(y / BLOCK) * nbx + x / BLOCK];
            u[(y, x)] = F::of_f64(dx as f64);
            v[(y, x)] = F::of_f64(dy as f64);
        }
    }
    FlowField::new(u, v)
}
