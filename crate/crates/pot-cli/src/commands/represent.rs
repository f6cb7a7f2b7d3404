//! `pot represent` — fixed-length video vectors from descriptor
//! sequences: pooled time series, bag of words, or improved Fisher
//! vectors.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use pot::baselines::{
    default_ifv_k, encode_bow, encode_ifv, train_codebook, train_gmm, DEFAULT_BOW_K,
};
use pot::descriptors::load_precomputed;
use pot::io::descfile::write_descriptor_text;
use pot::io::splits::read_splits;
use pot::mat::Matrix;
use pot::model::{build_pyramid, DescriptorSequence, OperatorSet, TemporalFilter};
use pot::pooling::build_pot;
use pot::seed;

use crate::util::{
    audit_comments, descriptor_path, digest_file, kv, labeled_videos, load_manifest,
    representation_path, select_channels,
};
use crate::Shared;

/// Encoding method named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Pot,
    Bow,
    Ifv,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pot => "pot",
            Method::Bow => "bow",
            Method::Ifv => "ifv",
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    shared: &Shared,
    method: Method,
    levels: usize,
    ops: &str,
    k: Option<usize>,
    channels: &[String],
    descriptors: Option<&Path>,
    split_plan: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let (manifest, manifest_digest) = load_manifest(shared)?;
    labeled_videos(&manifest)?;
    let channels = select_channels(&manifest, channels)?;
    let ops = OperatorSet::parse_csv(ops)?;
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory '{}'", out.display()))?;

    // Bag-of-words and Fisher quantizers train on the first trial's
    // training videos when a split plan is supplied, else on everything.
    let quantizer_train: Option<BTreeSet<String>> = match split_plan {
        Some(path) => {
            let file = read_splits(path)
                .with_context(|| format!("reading split plans from '{}'", path.display()))?;
            let plan = file
                .plans
                .first()
                .ok_or_else(|| anyhow::anyhow!("split-plan file holds no trials"))?;
            Some(plan.train_ids().map(str::to_string).collect())
        }
        None => None,
    };
    let quantizer_scope = match (&quantizer_train, method) {
        (_, Method::Pot) => String::new(),
        (Some(_), _) => format!("train-videos-of-trial-0({})", split_plan.unwrap().display()),
        (None, _) => "all-videos".to_string(),
    };

    let mut written = 0usize;
    for (ch_index, channel) in channels.iter().enumerate() {
        // Load every video's descriptor sequence for this channel.
        let loaded: Vec<(String, DescriptorSequence<f64>, String)> = manifest
            .videos
            .par_iter()
            .map(|video| {
                let path =
                    descriptor_path(&manifest, &video.video_id, &channel.name, descriptors)?;
                let digest = digest_file(&path)?;
                let seq = load_precomputed::<f64>(&path, channel.expected_dim, true)
                    .with_context(|| {
                        format!(
                            "loading '{}' descriptors of video '{}'",
                            channel.name, video.video_id
                        )
                    })?;
                Ok::<_, anyhow::Error>((video.video_id.clone(), seq, digest))
            })
            .collect::<Result<_>>()?;

        // Fixed per-channel audit entries.
        let mut base_params = vec![
            kv("method", method.name()),
            kv("channel", &channel.name),
            kv("seed", shared.seed),
            kv("manifest_digest", &manifest_digest),
        ];
        if !quantizer_scope.is_empty() {
            base_params.push(kv("quantizer_training", &quantizer_scope));
        }

        // Per-video encoded vectors.
        let vectors: Vec<Vec<f64>> = match method {
            Method::Pot => {
                base_params.push(kv("levels", levels));
                base_params.push(kv("ops", ops.to_csv()));
                loaded
                    .par_iter()
                    .map(|(id, seq, _)| {
                        let pyramid =
                            build_pyramid(levels, seq.frame_count()).with_context(|| {
                                format!(
                                    "video '{id}' ({} frames) cannot carry a \
                                     {levels}-level pyramid",
                                    seq.frame_count()
                                )
                            })?;
                        Ok::<_, anyhow::Error>(build_pot(seq, &pyramid, &ops)?.into_data())
                    })
                    .collect::<Result<_>>()?
            }
            Method::Bow => {
                let k = k.unwrap_or(DEFAULT_BOW_K);
                base_params.push(kv("k", k));
                let rows = quantizer_rows(&loaded, &quantizer_train)?;
                let codebook = train_codebook(
                    &rows,
                    k,
                    seed::derive(shared.seed, "codebook", ch_index as u64),
                )
                .with_context(|| format!("training the '{}' codebook", channel.name))?;
                loaded
                    .par_iter()
                    .map(|(_, seq, _)| {
                        let full = [TemporalFilter::new(1, seq.frame_count())?];
                        Ok::<_, anyhow::Error>(encode_bow(seq, &codebook, &full)?)
                    })
                    .collect::<Result<_>>()?
            }
            Method::Ifv => {
                let k = k.unwrap_or_else(|| default_ifv_k(loaded[0].1.dim()));
                base_params.push(kv("k", k));
                let rows = quantizer_rows(&loaded, &quantizer_train)?;
                let gmm =
                    train_gmm(&rows, k, seed::derive(shared.seed, "gmm", ch_index as u64))
                        .with_context(|| format!("training the '{}' mixture", channel.name))?;
                loaded
                    .par_iter()
                    .map(|(_, seq, _)| {
                        let full = [TemporalFilter::new(1, seq.frame_count())?];
                        Ok::<_, anyhow::Error>(encode_ifv(seq, &gmm, &full)?)
                    })
                    .collect::<Result<_>>()?
            }
        };

        for ((id, _, digest), vector) in loaded.iter().zip(vectors) {
            let mut params = base_params.clone();
            params.push(kv("video", id));
            params.push(kv("input_digest", digest));
            let rep = DescriptorSequence::from_rows(
                id.clone(),
                format!("{}.{}", channel.name, method.name()),
                vec![vector],
            )?;
            let path = representation_path(out, id, &channel.name, method.name());
            write_descriptor_text(
                &path,
                &rep,
                &audit_comments("represent", &params),
                shared.no_clobber,
            )?;
            written += 1;
        }
    }

    println!(
        "wrote {written} {} representation files into {}",
        method.name(),
        out.display()
    );
    Ok(())
}

/// Stacks the rows the quantizer trains on: every frame of every video, or
/// only of the listed training videos.
fn quantizer_rows(
    loaded: &[(String, DescriptorSequence<f64>, String)],
    train: &Option<BTreeSet<String>>,
) -> Result<Matrix<f64>> {
    let rows: Vec<Vec<f64>> = loaded
        .iter()
        .filter(|(id, _, _)| train.as_ref().map_or(true, |set| set.contains(id)))
        .flat_map(|(_, seq, _)| seq.frames().map(|r| r.to_vec()))
        .collect();
    if rows.is_empty() {
        bail!("the split plan's training videos match none of the manifest's videos");
    }
    Matrix::from_rows(&rows)
        .ok_or_else(|| anyhow::anyhow!("descriptor files disagree on dimension across videos"))
}
