//! `pot evaluate` — χ² kernel SVM over repeated random splits, reported
//! as structured text. Several representation directories (e.g. bag-of-
//! words encodings from different clustering seeds) are evaluated under
//! identical split plans and aggregated in a [reseed] section.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use pot::evaluation::{run_experiment, FeatureSetBuilder, LabeledVideos, ReseedSummary};
use pot::io::descfile::read_descriptor_file;
use pot::io::report::{render_report, render_reseed};

use super::represent::Method;
use crate::util::{
    combine_digests, digest_file, kv, labeled_videos, load_manifest, representation_path,
    resolve_plans, save_splits_file, select_channels,
};
use crate::{Shared, SplitArgs};

pub fn run(
    shared: &Shared,
    splits: &SplitArgs,
    representations: &[PathBuf],
    method: Method,
    channels: &[String],
    c: f64,
) -> Result<()> {
    let (manifest, manifest_digest) = load_manifest(shared)?;
    let videos = labeled_videos(&manifest)?;
    let channel_names: Vec<String> = select_channels(&manifest, channels)?
        .iter()
        .map(|d| d.name.clone())
        .collect();

    let (plans, split_params) = resolve_plans(splits, &videos, shared.seed)?;
    let mut params = vec![
        kv("command", "evaluate"),
        kv("version", crate::util::version()),
        kv("method", method.name()),
        kv("seed", shared.seed),
        kv("manifest_digest", &manifest_digest),
        kv(
            "representations",
            representations
                .iter()
                .map(|d| d.display().to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
    ];
    params.extend(split_params);

    if let Some(path) = &splits.save_splits {
        save_splits_file(path, &plans, shared.seed, &params, shared.no_clobber)?;
    }

    let mut reports = Vec::with_capacity(representations.len());
    let mut input_digests = Vec::new();
    for dir in representations {
        let (features, digests) =
            load_feature_set(dir, &videos, &channel_names, method)?;
        input_digests.extend(digests);
        reports.push(run_experiment(&features, &plans, c)?);
    }
    params.push(kv("inputs_digest", combine_digests(&input_digests)));

    let mut text = render_report(&reports[0], &params);
    if reports.len() > 1 {
        text.push_str(&render_reseed(&ReseedSummary::from_reports(&reports)));
    }
    emit_report(&text, splits.report.as_deref(), shared.no_clobber)
}

/// Loads one directory's representation files into a feature set, in
/// manifest order, returning per-file digests alongside.
fn load_feature_set(
    dir: &Path,
    videos: &LabeledVideos,
    channels: &[String],
    method: Method,
) -> Result<(pot::evaluation::FeatureSet<f64>, Vec<String>)> {
    let mut builder = FeatureSetBuilder::new(videos.clone(), channels.to_vec());
    let mut digests = Vec::new();
    for channel in channels {
        let expected_channel = format!("{}.{}", channel, method.name());
        let loaded: Vec<(String, Vec<f64>, String)> = videos
            .video_ids()
            .par_iter()
            .map(|id| {
                let path = representation_path(dir, id, channel, method.name());
                let seq = read_descriptor_file::<f64>(&path).with_context(|| {
                    format!("loading the '{channel}' representation of video '{id}'")
                })?;
                if seq.frame_count() != 1 {
                    bail!(
                        "'{}' holds {} rows; representations have exactly one \
                         (is this a descriptor directory instead?)",
                        path.display(),
                        seq.frame_count()
                    );
                }
                if seq.channel() != expected_channel {
                    bail!(
                        "'{}' was encoded as '{}', expected '{expected_channel}' \
                         (different --method or --channels than at represent time?)",
                        path.display(),
                        seq.channel()
                    );
                }
                Ok((id.clone(), seq.frame(0).to_vec(), digest_file(&path)?))
            })
            .collect::<Result<_>>()?;
        for (id, vector, digest) in loaded {
            builder.insert(channel, &id, vector)?;
            digests.push(digest);
        }
    }
    Ok((builder.finish()?, digests))
}

/// Writes the report to a file, or prints it when no path was given.
pub fn emit_report(text: &str, path: Option<&Path>, no_clobber: bool) -> Result<()> {
    match path {
        Some(path) => {
            pot::io::write_file(path, text.as_bytes(), no_clobber)?;
            println!("wrote report to {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
