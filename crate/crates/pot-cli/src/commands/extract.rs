//! `pot extract` — per-frame descriptors from frame directories, or
//! validation-plus-copy for precomputed channels.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use pot::descriptors::{extract_channel, load_precomputed, FrameSequence};
use pot::io::descfile::write_descriptor_text;
use pot::io::frames::{list_frame_files, load_frame_sequence};
use pot::io::manifest::ChannelSource;

use crate::util::{
    audit_comments, combine_digests, digest_file, kv, labeled_videos, load_manifest,
    select_channels,
};
use crate::Shared;

pub fn run(shared: &Shared, channels: &[String], out: &Path) -> Result<()> {
    let (manifest, manifest_digest) = load_manifest(shared)?;
    labeled_videos(&manifest)?; // id hygiene and label sanity
    let channels = select_channels(&manifest, channels)?;
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory '{}'", out.display()))?;

    let tasks: Vec<_> = manifest
        .videos
        .iter()
        .flat_map(|v| channels.iter().map(move |c| (v, *c)))
        .collect();
    tasks.par_iter().try_for_each(|(video, channel)| {
        let out_path = out.join(format!("{}.{}.potdesc", video.video_id, channel.name));
        match channel.source {
            ChannelSource::Computed(ch) => {
                let dir = video.frames_dir.as_deref().ok_or_else(|| {
                    anyhow!(
                        "video '{}' has no frame directory, needed to compute '{}'",
                        video.video_id,
                        channel.name
                    )
                })?;
                let frame_files = list_frame_files(dir)
                    .with_context(|| format!("listing frames of video '{}'", video.video_id))?;
                let digests: Vec<String> = frame_files
                    .iter()
                    .map(|p| digest_file(p))
                    .collect::<Result<_>>()?;
                let frames: FrameSequence<f64> = load_frame_sequence(&video.video_id, dir)
                    .with_context(|| format!("loading frames of video '{}'", video.video_id))?;
                let seq = extract_channel(&frames, ch).with_context(|| {
                    format!("extracting '{}' from video '{}'", channel.name, video.video_id)
                })?;
                let comments = audit_comments(
                    "extract",
                    &[
                        kv("video", &video.video_id),
                        kv("frames_dir", dir.display()),
                        kv("frames", frame_files.len()),
                        kv("frames_digest", combine_digests(&digests)),
                        kv("manifest_digest", &manifest_digest),
                    ],
                );
                write_descriptor_text(&out_path, &seq, &comments, shared.no_clobber)?;
            }
            ChannelSource::Precomputed => {
                // Validate, then copy byte for byte — precomputed
                // descriptors are never recomputed or rewritten.
                let src = video.descriptor_paths.get(&channel.name).ok_or_else(|| {
                    anyhow!(
                        "video '{}' names no file for precomputed channel '{}'",
                        video.video_id,
                        channel.name
                    )
                })?;
                load_precomputed::<f64>(src, channel.expected_dim, false).with_context(
                    || {
                        format!(
                            "validating precomputed '{}' of video '{}'",
                            channel.name, video.video_id
                        )
                    },
                )?;
                let bytes = std::fs::read(src)
                    .with_context(|| format!("reading '{}'", src.display()))?;
                pot::io::write_file(&out_path, &bytes, shared.no_clobber)?;
            }
        }
        Ok::<_, anyhow::Error>(())
    })?;

    println!(
        "extracted {} descriptor files into {}",
        tasks.len(),
        out.display()
    );
    Ok(())
}
