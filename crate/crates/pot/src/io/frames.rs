//! Loading video frames from directories of still images.
//!
//! A video is a directory of image files, one per frame, ordered by file
//! name. PGM is the primary format; anything the `image` crate decodes is
//! accepted. Color inputs are converted to grayscale with luma weights
//! 0.299 / 0.587 / 0.114.

use std::path::{Path, PathBuf};

use image::DynamicImage;

use crate::descriptors::{Frame, FrameSequence};
use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::scalar::Real;

use super::write_file;

const EXTENSIONS: [&str; 7] = ["pgm", "ppm", "pnm", "png", "jpg", "jpeg", "bmp"];

/// Lists the image files of `dir` in lexicographic file-name order.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
            .unwrap_or(false);
        if path.is_file() && is_image {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Decodes one image file into a grayscale frame with values in [0, 1].
pub fn load_frame<F: Real>(path: &Path) -> Result<Frame<F>> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let (h, w) = (img.height() as usize, img.width() as usize);
    let pixels = match img {
        DynamicImage::ImageLuma8(gray) => {
            // Divide (not multiply by a reciprocal) so values match
            // `Frame::from_gray_u8` bit for bit.
            let max = F::of_usize(255);
            Matrix::from_vec(
                h,
                w,
                gray.into_raw()
                    .into_iter()
                    .map(|b| F::of_usize(b as usize) / max)
                    .collect(),
            )
        }
        DynamicImage::ImageLuma16(gray) => {
            let max = F::of_usize(65_535);
            Matrix::from_vec(
                h,
                w,
                gray.into_raw()
                    .into_iter()
                    .map(|b| F::of_usize(b as usize) / max)
                    .collect(),
            )
        }
        other => {
            let rgb = other.to_rgb8();
            let max = F::of_usize(255);
            let (wr, wg, wb) = (F::of_f64(0.299), F::of_f64(0.587), F::of_f64(0.114));
            let data = rgb
                .pixels()
                .map(|p| {
                    let r = F::of_usize(p.0[0] as usize);
                    let g = F::of_usize(p.0[1] as usize);
                    let b = F::of_usize(p.0[2] as usize);
                    (wr * r + wg * g + wb * b) / max
                })
                .collect();
            Matrix::from_vec(h, w, data)
        }
    };
    Frame::new(pixels)
}

/// Loads a whole video from a frame directory.
pub fn load_frame_sequence<F: Real>(video_id: &str, dir: &Path) -> Result<FrameSequence<F>> {
    let files = list_frame_files(dir)?;
    if files.is_empty() {
        return Err(Error::Image {
            path: dir.to_path_buf(),
            message: "directory contains no image frames".to_string(),
        });
    }
    let frames = files
        .iter()
        .map(|p| load_frame(p))
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(video_id, frames)
}

/// Writes a binary (P5) PGM file; handy for generating synthetic datasets.
pub fn write_pgm(path: &Path, height: usize, width: usize, pixels: &[u8]) -> Result<()> {
    assert_eq!(pixels.len(), height * width, "pixel buffer size mismatch");
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(pixels);
    write_file(path, &bytes, false)
}
