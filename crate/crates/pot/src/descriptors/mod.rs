//! Per-frame descriptor extraction: orientation histograms of optical flow
//! (HOF), of image gradients (HOG), and of flow-component gradients (MBH),
//! plus ingestion of precomputed descriptor files.
//!
//! All three histogram descriptors share one recipe: a 5x5 spatial grid over
//! the frame (floor-split, the 2-D analogue of the temporal pyramid split),
//! 8 signed orientation bins of 45 degrees per cell with bin 0 centered at
//! 0 degrees (rightward), votes weighted by vector magnitude with hard
//! assignment, and L1 normalization. HOF bins the flow vectors themselves;
//! HOG and MBH bin central-difference spatial gradients, so image borders
//! contribute nothing.

pub mod flow;

use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::model::DescriptorSequence;
use crate::scalar::Real;

pub use flow::{compute_flow, FlowField};

/// Cells per side of the spatial grid.
pub const GRID: usize = 5;
/// Orientation bins per cell.
pub const ORIENT_BINS: usize = 8;
/// Dimensionality of one grid histogram (HOF, HOG, and each MBH half).
pub const HIST_DIM: usize = GRID * GRID * ORIENT_BINS;

/// A grayscale frame with pixel values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<F> {
    pixels: Matrix<F>,
}

impl<F: Real> Frame<F> {
    pub fn new(pixels: Matrix<F>) -> Result<Self> {
        for (y, row) in pixels.row_iter().enumerate() {
            for (x, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < F::zero() || v > F::one() {
                    return Err(Error::PixelOutOfRange {
                        row: y,
                        col: x,
                        value: v.as_f64(),
                    });
                }
            }
        }
        Ok(Frame { pixels })
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        let m = Matrix::from_rows(&rows).ok_or(Error::ZeroDimension)?;
        Self::new(m)
    }

    /// Converts 8-bit gray levels to `[0, 1]` by dividing by 255.
    pub fn from_gray_u8(height: usize, width: usize, bytes: &[u8]) -> Result<Self> {
        assert_eq!(bytes.len(), height * width, "pixel buffer size mismatch");
        let scale = F::one() / F::of_usize(255);
        let data: Vec<F> = bytes.iter().map(|&b| F::of_usize(b as usize) * scale).collect();
        Ok(Frame {
            pixels: Matrix::from_vec(height, width, data),
        })
    }

    pub fn height(&self) -> usize {
        self.pixels.rows()
    }

    pub fn width(&self) -> usize {
        self.pixels.cols()
    }

    pub fn get(&self, y: usize, x: usize) -> F {
        self.pixels[(y, x)]
    }

    pub fn pixels(&self) -> &Matrix<F> {
        &self.pixels
    }

    /// Copy with every pixel multiplied by `c` (must stay within `[0, 1]`).
    pub fn scaled(&self, c: F) -> Result<Self> {
        let mut pixels = self.pixels.clone();
        for v in pixels.data_mut() {
            *v = *v * c;
        }
        Frame::new(pixels)
    }
}

/// An ordered sequence of same-sized frames belonging to one video.
#[derive(Debug, Clone)]
pub struct FrameSequence<F> {
    video_id: String,
    frames: Vec<Frame<F>>,
}

impl<F: Real> FrameSequence<F> {
    /// Requires at least one frame, uniform dimensions, and frames no
    /// smaller than the spatial grid (5x5).
    pub fn new(video_id: impl Into<String>, frames: Vec<Frame<F>>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::EmptySequence);
        }
        let (h, w) = (frames[0].height(), frames[0].width());
        if h < GRID || w < GRID {
            return Err(Error::FrameTooSmall { h, w, min: GRID });
        }
        for (index, f) in frames.iter().enumerate() {
            if f.height() != h || f.width() != w {
                return Err(Error::FrameSizeMismatch {
                    index,
                    expected_h: h,
                    expected_w: w,
                    actual_h: f.height(),
                    actual_w: f.width(),
                });
            }
        }
        Ok(FrameSequence {
            video_id: video_id.into(),
            frames,
        })
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn frames(&self) -> &[Frame<F>] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }
}

/// Descriptor channels this crate can compute from raw frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Histogram of optical flow; one descriptor per consecutive frame pair.
    Hof,
    /// Histogram of image gradients; one descriptor per frame.
    Hog,
    /// Motion boundary histogram (gradients of each flow component); one
    /// descriptor per consecutive frame pair.
    Mbh,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Hof, Channel::Hog, Channel::Mbh];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Hof => "hof",
            Channel::Hog => "hog",
            Channel::Mbh => "mbh",
        }
    }

    /// Descriptor dimensionality of the channel.
    pub fn dim(self) -> usize {
        match self {
            Channel::Hof | Channel::Hog => HIST_DIM,
            Channel::Mbh => 2 * HIST_DIM,
        }
    }

    /// True for channels computed from frame pairs (m frames -> m-1 rows).
    pub fn needs_flow(self) -> bool {
        matches!(self, Channel::Hof | Channel::Mbh)
    }
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "hof" => Ok(Channel::Hof),
            "hog" => Ok(Channel::Hog),
            "mbh" => Ok(Channel::Mbh),
            other => Err(Error::UnknownChannel(other.to_string())),
        }
    }
}

/// Maps each coordinate of an axis of length `size` to its grid cell,
/// using the floor split: cell `j` (1-based of 5) covers 1-based positions
/// `[floor((j-1)*size/5) + 1, floor(j*size/5)]`.
fn cell_lookup(size: usize) -> Vec<usize> {
    let mut lookup = vec![0usize; size];
    for j in 1..=GRID {
        let start = (j - 1) * size / GRID;
        let end = j * size / GRID;
        for slot in &mut lookup[start..end] {
            *slot = j - 1;
        }
    }
    lookup
}

/// Signed orientation bin of a vector: 8 bins of 45 degrees, bin 0 centered
/// at 0 degrees (positive x), proceeding counterclockwise in (x, y) math
/// convention (bin 2 is centered on positive y).
fn orientation_bin<F: Real>(vx: F, vy: F) -> usize {
    let mut deg = vy.atan2(vx).to_degrees().as_f64();
    if deg < 0.0 {
        deg += 360.0;
    }
    (((deg + 22.5) / 45.0).floor() as usize) % ORIENT_BINS
}

/// Accumulates a 5x5x8 magnitude-weighted orientation histogram over an
/// `h x w` field of vectors. `vector_at` returns `None` for positions that
/// do not vote (e.g. borders of gradient fields).
fn grid_orientation_histogram<F: Real>(
    h: usize,
    w: usize,
    mut vector_at: impl FnMut(usize, usize) -> Option<(F, F)>,
) -> Vec<F> {
    let row_cell = cell_lookup(h);
    let col_cell = cell_lookup(w);
    let mut hist = vec![F::zero(); HIST_DIM];
    for y in 0..h {
        for x in 0..w {
            let Some((vx, vy)) = vector_at(y, x) else {
                continue;
            };
            let mag = (vx * vx + vy * vy).sqrt();
            if mag > F::zero() {
                let cell = row_cell[y] * GRID + col_cell[x];
                let slot = cell * ORIENT_BINS + orientation_bin(vx, vy);
                hist[slot] = hist[slot] + mag;
            }
        }
    }
    hist
}

/// Rescales to unit L1 norm in place; an all-zero vector is left alone.
fn l1_normalize<F: Real>(v: &mut [F]) {
    let norm: F = v.iter().map(|x| x.abs()).sum();
    if norm > F::zero() {
        for x in v.iter_mut() {
            *x = *x / norm;
        }
    }
}

/// Central-difference gradient of a scalar field at interior positions.
fn central_gradient<F: Real>(field: &Matrix<F>, y: usize, x: usize) -> Option<(F, F)> {
    if y == 0 || x == 0 || y + 1 >= field.rows() || x + 1 >= field.cols() {
        return None;
    }
    let half = F::of_f64(0.5);
    let gx = (field[(y, x + 1)] - field[(y, x - 1)]) * half;
    let gy = (field[(y + 1, x)] - field[(y - 1, x)]) * half;
    Some((gx, gy))
}

fn check_grid_fits<F: Real>(h: usize, w: usize) -> Result<()> {
    if h < GRID || w < GRID {
        return Err(Error::FrameTooSmall { h, w, min: GRID });
    }
    Ok(())
}

/// 200-D histogram of flow orientation: every pixel votes its flow vector.
pub fn hof_descriptor<F: Real>(flow: &FlowField<F>) -> Result<Vec<F>> {
    check_grid_fits::<F>(flow.height(), flow.width())?;
    let mut hist =
        grid_orientation_histogram(flow.height(), flow.width(), |y, x| Some(flow.at(y, x)));
    l1_normalize(&mut hist);
    Ok(hist)
}

/// 200-D histogram of image-gradient orientation (central differences;
/// border pixels do not vote).
pub fn hog_descriptor<F: Real>(frame: &Frame<F>) -> Result<Vec<F>> {
    check_grid_fits::<F>(frame.height(), frame.width())?;
    let mut hist = grid_orientation_histogram(frame.height(), frame.width(), |y, x| {
        central_gradient(frame.pixels(), y, x)
    });
    l1_normalize(&mut hist);
    Ok(hist)
}

/// 400-D motion boundary histogram: the gradient-orientation histogram of
/// the u flow component followed by that of the v component, each half
/// L1-normalized independently.
pub fn mbh_descriptor<F: Real>(flow: &FlowField<F>) -> Result<Vec<F>> {
    check_grid_fits::<F>(flow.height(), flow.width())?;
    let (h, w) = (flow.height(), flow.width());
    let mut u_half = grid_orientation_histogram(h, w, |y, x| central_gradient(flow.u(), y, x));
    let mut v_half = grid_orientation_histogram(h, w, |y, x| central_gradient(flow.v(), y, x));
    l1_normalize(&mut u_half);
    l1_normalize(&mut v_half);
    u_half.extend(v_half);
    Ok(u_half)
}

/// Computes one descriptor channel for a whole video. HOG yields one row per
/// frame; HOF and MBH yield one row per consecutive frame pair (m-1 rows).
/// Frame pairs are processed in parallel; row order follows frame order.
pub fn extract_channel<F: Real>(
    video: &FrameSequence<F>,
    channel: Channel,
) -> Result<DescriptorSequence<F>> {
    let rows: Vec<Vec<F>> = match channel {
        Channel::Hog => video
            .frames()
            .par_iter()
            .map(hog_descriptor)
            .collect::<Result<_>>()?,
        Channel::Hof | Channel::Mbh => {
            if video.len() < 2 {
                return Err(Error::NeedsTwoFrames {
                    video: video.video_id().to_string(),
                    channel: channel.name().to_string(),
                    frames: video.len(),
                });
            }
            (0..video.len() - 1)
                .into_par_iter()
                .map(|i| {
                    let flow = compute_flow(&video.frames()[i], &video.frames()[i + 1])?;
                    match channel {
                        Channel::Hof => hof_descriptor(&flow),
                        Channel::Mbh => mbh_descriptor(&flow),
                        Channel::Hog => unreachable!(),
                    }
                })
                .collect::<Result<_>>()?
        }
    };
    DescriptorSequence::from_rows(video.video_id(), channel.name(), rows)
}

/// Reads a descriptor file (text or binary, auto-detected), optionally
/// checking its dimensionality and L1-normalizing each row.
pub fn load_precomputed<F: Real>(
    path: &Path,
    expected_dim: Option<usize>,
    normalize: bool,
) -> Result<DescriptorSequence<F>> {
    let mut seq = crate::io::descfile::read_descriptor_file(path)?;
    if let Some(n) = expected_dim {
        if seq.dim() != n {
            return Err(Error::DimensionMismatch {
                context: format!("descriptor file {}", path.display()),
                expected: n,
                actual: seq.dim(),
            });
        }
    }
    if normalize {
        seq.l1_normalize_rows();
    }
    Ok(seq)
}
