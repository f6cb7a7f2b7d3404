//! Plumbing shared by the subcommands: manifest loading, channel
//! selection, input digests, audit headers, and split-plan handling.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use pot::evaluation::{make_splits, LabeledVideos, SplitPlan};
use pot::io::manifest::{ChannelDecl, ExperimentManifest};
use pot::io::splits::{read_splits, render_splits};
use pot::seed;

use crate::{Shared, SplitArgs};

/// The tool version embedded in every output header.
pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// FNV digest of a file's bytes, as printed in audit headers.
pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading '{}' for its digest", path.display()))?;
    Ok(seed::digest_hex(&bytes))
}

/// Folds many per-input digests into one, order-sensitively.
pub fn combine_digests(digests: &[String]) -> String {
    seed::digest_hex(digests.join(",").as_bytes())
}

/// Loads and digests the manifest named in the shared flags.
pub fn load_manifest(shared: &Shared) -> Result<(ExperimentManifest, String)> {
    let digest = digest_file(&shared.manifest)?;
    let manifest = ExperimentManifest::load(&shared.manifest)
        .with_context(|| format!("loading manifest '{}'", shared.manifest.display()))?;
    Ok((manifest, digest))
}

/// Resolves a `--channels` selection against the manifest's declarations;
/// an empty selection means all of them.
pub fn select_channels<'m>(
    manifest: &'m ExperimentManifest,
    requested: &[String],
) -> Result<Vec<&'m ChannelDecl>> {
    if requested.is_empty() {
        if manifest.channels.is_empty() {
            bail!("the manifest declares no channels");
        }
        return Ok(manifest.channels.iter().collect());
    }
    requested
        .iter()
        .map(|name| {
            manifest.channel(name).ok_or_else(|| {
                anyhow::anyhow!(
                    "channel '{name}' is not declared in the manifest (declared: {})",
                    manifest
                        .channels
                        .iter()
                        .map(|c| c.name.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            })
        })
        .collect()
}

/// Labeled video set in manifest order. Ids double as file-name stems, so
/// they must stay free of path separators and dots.
pub fn labeled_videos(manifest: &ExperimentManifest) -> Result<LabeledVideos> {
    let mut ids = Vec::with_capacity(manifest.videos.len());
    let mut labels = Vec::with_capacity(manifest.videos.len());
    for v in &manifest.videos {
        if v.video_id.contains(['.', '/', '\\']) {
            bail!(
                "video id '{}' contains '.', '/' or '\\', which descriptor \
                 file names cannot carry",
                v.video_id
            );
        }
        ids.push(v.video_id.clone());
        labels.push(v.label.clone());
    }
    Ok(LabeledVideos::new(ids, labels)?)
}

/// Where a video's descriptor file for `channel` lives: the explicit
/// manifest path, else `<dir>/<video>.<channel>.potdesc` under
/// `--descriptors`.
pub fn descriptor_path(
    manifest: &ExperimentManifest,
    video_id: &str,
    channel: &str,
    descriptors_dir: Option<&Path>,
) -> Result<PathBuf> {
    let video = manifest
        .video(video_id)
        .expect("video ids come from the manifest");
    if let Some(explicit) = video.descriptor_paths.get(channel) {
        return Ok(explicit.clone());
    }
    let Some(dir) = descriptors_dir else {
        bail!(
            "video '{video_id}' has no '{channel}' descriptor path in the \
             manifest and no --descriptors directory was given"
        );
    };
    Ok(manifest.descriptor_path(video, channel, dir))
}

/// Representation file written by `represent` and read back by `evaluate`.
pub fn representation_path(dir: &Path, video_id: &str, channel: &str, method: &str) -> PathBuf {
    dir.join(format!("{video_id}.{channel}.{method}.potdesc"))
}

/// Split plans for an evaluation command: either read back from a
/// `--split-plan` file or generated from `--trials`/`--split-frac`.
/// Returns the plans and the params entries documenting their origin.
pub fn resolve_plans(
    splits: &SplitArgs,
    videos: &LabeledVideos,
    base_seed: u64,
) -> Result<(Vec<SplitPlan>, Vec<(String, String)>)> {
    let mut params = Vec::new();
    let plans = if let Some(path) = &splits.split_plan {
        let file = read_splits(path)
            .with_context(|| format!("reading split plans from '{}'", path.display()))?;
        params.push(("split_plan".to_string(), path.display().to_string()));
        params.push(("split_plan_digest".to_string(), digest_file(path)?));
        file.plans
    } else {
        params.push(("split_frac".to_string(), format!("{}", splits.split_frac)));
        make_splits(
            &videos.class_members(),
            splits.trials as usize,
            base_seed,
            splits.split_frac,
        )?
    };
    Ok((plans, params))
}

/// Writes the plans used to `--save-splits`, with an audit comment block.
pub fn save_splits_file(
    path: &Path,
    plans: &[SplitPlan],
    base_seed: u64,
    params: &[(String, String)],
    no_clobber: bool,
) -> Result<()> {
    let mut text = String::new();
    text.push_str(&format!("# version={}\n", version()));
    for (k, v) in params {
        text.push_str(&format!("# {k}={v}\n"));
    }
    text.push_str(&render_splits(plans, base_seed));
    pot::io::write_file(path, text.as_bytes(), no_clobber)?;
    Ok(())
}

/// The audit comment block embedded in descriptor/representation files.
pub fn audit_comments(command: &str, entries: &[(String, String)]) -> Vec<String> {
    let mut out = vec![
        format!("version={}", version()),
        format!("command={command}"),
    ];
    out.extend(entries.iter().map(|(k, v)| format!("{k}={v}")));
    out
}

/// Key=value pair helper keeping call sites terse.
pub fn kv(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}
