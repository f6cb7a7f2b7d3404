//! The POT-DESC container: one real-valued matrix per file, used for
//! per-frame descriptors (m rows) and for video-level representations
//! (m = 1).
//!
//! Text form: a header line `POT-DESC v1 m=<rows> n=<cols> channel=<name>`,
//! optionally followed by `#` comment lines (provenance, parameters), then
//! exactly m data lines of n space-separated reals. Values are written in
//! scientific notation with enough digits to round-trip.
//!
//! Binary form: a 16-byte magic (`POTDESCB` padded with zero bytes), m and n
//! as little-endian u32, then m*n little-endian f32 values row-major. The
//! reader distinguishes the two by the first bytes.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::DescriptorSequence;
use crate::scalar::Real;

use super::{read_bytes, write_file};

const TEXT_HEADER: &str = "POT-DESC v1";
const BINARY_MAGIC: &[u8; 16] = b"POTDESCB\0\0\0\0\0\0\0\0";

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::DescriptorFormat {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads either container form, auto-detected from the leading bytes.
pub fn read_descriptor_file<F: Real>(path: &Path) -> Result<DescriptorSequence<F>> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(b"POTDESCB") {
        read_binary(path, &bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|e| format_err(path, 1, format!("file is not UTF-8 text: {e}")))?;
        read_text(path, &text)
    }
}

fn read_text<F: Real>(path: &Path, text: &str) -> Result<DescriptorSequence<F>> {
    let mut lines = text.lines().enumerate();

    // Locate the header, tolerating leading blank lines.
    let (header_no, header) = loop {
        match lines.next() {
            Some((i, l)) if l.trim().is_empty() => {
                let _ = i;
            }
            Some((i, l)) => break (i + 1, l),
            None => return Err(Error::EmptySequence),
        }
    };
    if !header.starts_with(TEXT_HEADER) {
        return Err(format_err(path, header_no, "missing POT-DESC v1 header"));
    }
    let mut m: Option<usize> = None;
    let mut n: Option<usize> = None;
    let mut channel = String::new();
    for token in header[TEXT_HEADER.len()..].split_whitespace() {
        let Some((key, value)) = token.split_once('=') else {
            return Err(format_err(
                path,
                header_no,
                format!("malformed header token '{token}'"),
            ));
        };
        match key {
            "m" => {
                m = Some(value.parse().map_err(|_| {
                    format_err(path, header_no, format!("bad row count '{value}'"))
                })?)
            }
            "n" => {
                n = Some(value.parse().map_err(|_| {
                    format_err(path, header_no, format!("bad column count '{value}'"))
                })?)
            }
            "channel" => channel = value.to_string(),
            _ => {} // Unknown header fields are ignored for forward compatibility.
        }
    }
    let m = m.ok_or_else(|| format_err(path, header_no, "header lacks m="))?;
    let n = n.ok_or_else(|| format_err(path, header_no, "header lacks n="))?;

    let mut rows: Vec<Vec<F>> = Vec::with_capacity(m);
    for (i, line) in lines {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if rows.len() == m {
            return Err(format_err(
                path,
                line_no,
                format!("more than the declared {m} data rows"),
            ));
        }
        let mut row = Vec::with_capacity(n);
        for token in trimmed.split_whitespace() {
            let v: F = token.parse().map_err(|_| {
                format_err(path, line_no, format!("unparseable value '{token}'"))
            })?;
            row.push(v);
        }
        if row.len() != n {
            return Err(format_err(
                path,
                line_no,
                format!("row has {} values, expected {n}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != m {
        return Err(format_err(
            path,
            text.lines().count(),
            format!("expected {m} data rows, found {}", rows.len()),
        ));
    }
    let video_id = video_id_from_path(path);
    DescriptorSequence::from_rows(video_id, channel, rows)
}

fn read_binary<F: Real>(path: &Path, bytes: &[u8]) -> Result<DescriptorSequence<F>> {
    let fail = |msg: &str| format_err(path, 0, msg);
    if bytes.len() < BINARY_MAGIC.len() + 8 || &bytes[..BINARY_MAGIC.len()] != BINARY_MAGIC {
        return Err(fail("truncated or corrupt POTDESCB header"));
    }
    let u32_at = |off: usize| {
        u32::from_le_bytes(bytes[off..off + 4].try_into().expect("length checked")) as usize
    };
    let m = u32_at(BINARY_MAGIC.len());
    let n = u32_at(BINARY_MAGIC.len() + 4);
    let data_off = BINARY_MAGIC.len() + 8;
    let expected = m
        .checked_mul(n)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| fail("row/column counts overflow"))?;
    if bytes.len() != data_off + expected {
        return Err(fail(&format!(
            "payload is {} bytes, expected {expected} for {m}x{n} f32",
            bytes.len() - data_off
        )));
    }
    let mut rows = Vec::with_capacity(m);
    for r in 0..m {
        let mut row = Vec::with_capacity(n);
        for c in 0..n {
            let off = data_off + 4 * (r * n + c);
            let v = f32::from_le_bytes(bytes[off..off + 4].try_into().expect("length checked"));
            row.push(F::of_f64(v as f64));
        }
        rows.push(row);
    }
    DescriptorSequence::from_rows(video_id_from_path(path), "", rows)
}

/// The video id recorded on load is the file stem up to the first `.`,
/// matching the `<video>.<channel>.potdesc` naming convention.
fn video_id_from_path(path: &Path) -> String {
    path.file_name()
        .and_then(|s| s.to_str())
        .map(|s| s.split('.').next().unwrap_or(s).to_string())
        .unwrap_or_default()
}

/// Renders the text form. `comments` become `#` lines after the header.
pub fn render_text<F: Real>(seq: &DescriptorSequence<F>, comments: &[String]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{TEXT_HEADER} m={} n={} channel={}\n",
        seq.frame_count(),
        seq.dim(),
        seq.channel()
    ));
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    for row in seq.frames() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            out.push_str(&format!("{v:e}"));
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Writes the text form to `path`.
pub fn write_descriptor_text<F: Real>(
    path: &Path,
    seq: &DescriptorSequence<F>,
    comments: &[String],
    no_clobber: bool,
) -> Result<()> {
    debug_assert!(
        !seq.channel().contains(char::is_whitespace),
        "channel names must not contain whitespace"
    );
    write_file(path, render_text(seq, comments).as_bytes(), no_clobber)
}

/// Writes the binary form (values narrowed to f32) to `path`.
pub fn write_descriptor_binary<F: Real>(
    path: &Path,
    seq: &DescriptorSequence<F>,
    no_clobber: bool,
) -> Result<()> {
    let mut bytes = Vec::with_capacity(24 + 4 * seq.frame_count() * seq.dim());
    bytes.extend_from_slice(BINARY_MAGIC);
    bytes.extend_from_slice(&(seq.frame_count() as u32).to_le_bytes());
    bytes.extend_from_slice(&(seq.dim() as u32).to_le_bytes());
    for row in seq.frames() {
        for v in row {
            bytes.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
    write_file(path, &bytes, no_clobber)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use proptest::prelude::*;
    use rand::Rng;
    use tempfile::tempdir;

    fn sample_seq() -> DescriptorSequence<f64> {
        DescriptorSequence::from_rows(
            "clip",
            "hof",
            vec![vec![0.25, -1.5e-7, 3.0], vec![1.0, 0.0, 2.5e11]],
        )
        .unwrap()
    }

    #[test]
    fn text_round_trip_is_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("clip.hof.potdesc");
        let seq = sample_seq();
        write_descriptor_text(&path, &seq, &["made by a test".into()], false).unwrap();
        let back: DescriptorSequence<f64> = read_descriptor_file(&path).unwrap();
        assert_eq!(back.values(), seq.values());
        assert_eq!(back.channel(), "hof");
        assert_eq!(back.video_id(), "clip");
    }

    #[test]
    fn binary_round_trip_within_f32() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("clip.hof.potdesc");
        let seq = sample_seq();
        write_descriptor_binary(&path, &seq, false).unwrap();
        let back: DescriptorSequence<f64> = read_descriptor_file(&path).unwrap();
        assert_eq!(back.frame_count(), 2);
        assert_eq!(back.dim(), 3);
        for t in 0..2 {
            for (a, b) in back.frame(t).iter().zip(seq.frame(t)) {
                assert_eq!(*a, *b as f32 as f64);
            }
        }
    }

    #[test]
    fn ragged_row_error_names_the_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.potdesc");
        std::fs::write(&path, "POT-DESC v1 m=2 n=3 channel=x\n1 2 3\n4 5\n").unwrap();
        let err = read_descriptor_file::<f64>(&path).unwrap_err();
        match err {
            Error::DescriptorFormat { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("expected 3"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn empty_file_reports_no_frames() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.potdesc");
        std::fs::write(&path, "").unwrap();
        let err = read_descriptor_file::<f64>(&path).unwrap_err();
        assert!(err.to_string().contains("no frames"), "{err}");
    }

    #[test]
    fn row_count_mismatch_is_detected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("short.potdesc");
        std::fs::write(&path, "POT-DESC v1 m=3 n=1 channel=x\n1\n2\n").unwrap();
        let err = read_descriptor_file::<f64>(&path).unwrap_err();
        assert!(err.to_string().contains("expected 3 data rows"), "{err}");

        let path = dir.path().join("long.potdesc");
        std::fs::write(&path, "POT-DESC v1 m=1 n=1 channel=x\n1\n2\n").unwrap();
        let err = read_descriptor_file::<f64>(&path).unwrap_err();
        assert!(err.to_string().contains("more than the declared"), "{err}");
    }

    #[test]
    fn bad_value_errors_name_the_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("nan.potdesc");
        std::fs::write(&path, "POT-DESC v1 m=1 n=2 channel=x\n# note\n1 oops\n").unwrap();
        let err = read_descriptor_file::<f64>(&path).unwrap_err();
        match err {
            Error::DescriptorFormat { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn no_clobber_refuses_overwrite() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("clip.hof.potdesc");
        let seq = sample_seq();
        write_descriptor_text(&path, &seq, &[], true).unwrap();
        assert!(matches!(
            write_descriptor_text(&path, &seq, &[], true),
            Err(Error::WouldClobber(_))
        ));
        write_descriptor_text(&path, &seq, &[], false).unwrap();
    }

    proptest! {
        /// Arbitrary finite matrices survive a text round trip bit-exactly.
        #[test]
        fn text_round_trip_random_matrices(seed_ix in 0u64..40, m in 1usize..6, n in 1usize..6) {
            let mut rng = seed::rng(13, "descfile", seed_ix);
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            let mantissa: f64 = rng.gen_range(-1.0..1.0);
                            let exp: i32 = rng.gen_range(-300..300);
                            mantissa * 10f64.powi(exp)
                        })
                        .collect()
                })
                .collect();
            let seq = DescriptorSequence::from_rows("v", "c", rows).unwrap();
            let dir = tempdir().unwrap();
            let path = dir.path().join("v.c.potdesc");
            write_descriptor_text(&path, &seq, &[], false).unwrap();
            let back: DescriptorSequence<f64> = read_descriptor_file(&path).unwrap();
            prop_assert_eq!(back.values(), seq.values());
        }
    }
}
