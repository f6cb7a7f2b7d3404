//! `pot dtw` — 1-nearest-neighbor dynamic-time-warping baseline over raw
//! descriptor sequences, under the same split protocol and report format
//! as `evaluate`.

use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;

use pot::descriptors::load_precomputed;
use pot::evaluation::run_dtw_experiment;
use pot::io::report::render_report;
use pot::model::DescriptorSequence;

use super::evaluate::emit_report;
use crate::util::{
    combine_digests, descriptor_path, digest_file, kv, labeled_videos, load_manifest,
    resolve_plans, save_splits_file, select_channels,
};
use crate::{Shared, SplitArgs};

pub fn run(
    shared: &Shared,
    splits: &SplitArgs,
    channel: Option<&str>,
    descriptors: Option<&Path>,
) -> Result<()> {
    let (manifest, manifest_digest) = load_manifest(shared)?;
    let videos = labeled_videos(&manifest)?;
    let declared = select_channels(&manifest, &[])?;
    let channel = match channel {
        Some(name) => {
            select_channels(&manifest, &[name.to_string()])?[0]
        }
        None => declared[0],
    };

    let (plans, split_params) = resolve_plans(splits, &videos, shared.seed)?;
    let mut params = vec![
        kv("command", "dtw"),
        kv("version", crate::util::version()),
        kv("channel", &channel.name),
        kv("seed", shared.seed),
        kv("manifest_digest", &manifest_digest),
    ];
    params.extend(split_params);

    if let Some(path) = &splits.save_splits {
        save_splits_file(path, &plans, shared.seed, &params, shared.no_clobber)?;
    }

    // Sequences in manifest (= LabeledVideos) order.
    let loaded: Vec<(DescriptorSequence<f64>, String)> = videos
        .video_ids()
        .par_iter()
        .map(|id| {
            let path = descriptor_path(&manifest, id, &channel.name, descriptors)?;
            let digest = digest_file(&path)?;
            let seq = load_precomputed::<f64>(&path, channel.expected_dim, true)
                .with_context(|| {
                    format!("loading '{}' descriptors of video '{id}'", channel.name)
                })?;
            Ok::<_, anyhow::Error>((seq, digest))
        })
        .collect::<Result<_>>()?;
    let digests: Vec<String> = loaded.iter().map(|(_, d)| d.clone()).collect();
    let sequences: Vec<DescriptorSequence<f64>> =
        loaded.into_iter().map(|(s, _)| s).collect();
    params.push(kv("inputs_digest", combine_digests(&digests)));

    let report = run_dtw_experiment(&videos, &sequences, &plans)?;
    let text = render_report(&report, &params);
    emit_report(&text, splits.report.as_deref(), shared.no_clobber)
}
