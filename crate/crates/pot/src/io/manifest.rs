//! Experiment manifest: the dataset description every command starts from.
//!
//! Structured text, diff-friendly:
//!
//! ```text
//! # comment
//! @dataset my-activities
//! @channel hof source=computed
//! @channel cnn source=precomputed dim=4096
//! clip-001<TAB>walking<TAB>frames=videos/clip-001
//! clip-002<TAB>waving<TAB>frames=videos/clip-002<TAB>cnn=cnn/clip-002.potdesc
//! ```
//!
//! One record per video: id, class label, then `key=value` pairs, where
//! `frames=<dir>` names a frame directory and `<channel>=<path>` names a
//! descriptor file. Relative paths are resolved against the manifest's
//! directory. Video ids must be unique, at least two classes must appear,
//! and every declared channel must be resolvable for every video (a
//! descriptor path, or a frame directory for computed channels).

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::descriptors::Channel;
use crate::error::{Error, Result};

use super::read_to_string;

/// How a channel's descriptors come to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSource {
    /// Computed from frames by this crate (hof, hog, mbh).
    Computed(Channel),
    /// Supplied externally as descriptor files (e.g. CNN activations).
    Precomputed,
}

/// A channel declaration (`@channel` line).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelDecl {
    pub name: String,
    pub source: ChannelSource,
    /// Expected descriptor dimensionality, when known.
    pub expected_dim: Option<usize>,
}

/// One video record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoEntry {
    pub video_id: String,
    pub label: String,
    pub frames_dir: Option<PathBuf>,
    /// Explicit descriptor files, keyed by channel name.
    pub descriptor_paths: BTreeMap<String, PathBuf>,
}

/// Parsed and validated manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentManifest {
    pub dataset: String,
    pub channels: Vec<ChannelDecl>,
    pub videos: Vec<VideoEntry>,
}

impl ExperimentManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base, path)
    }

    /// Parses manifest text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path, origin: &Path) -> Result<Self> {
        let fail = |line: usize, message: String| Error::ManifestFormat {
            path: origin.to_path_buf(),
            line,
            message,
        };

        let mut dataset = String::new();
        let mut channels: Vec<ChannelDecl> = Vec::new();
        let mut videos: Vec<VideoEntry> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end();
            let trimmed = line.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(decl) = trimmed.strip_prefix('@') {
                let mut parts = decl.split_whitespace();
                match parts.next() {
                    Some("dataset") => {
                        dataset = parts
                            .next()
                            .ok_or_else(|| fail(line_no, "@dataset needs a name".into()))?
                            .to_string();
                    }
                    Some("channel") => {
                        channels.push(parse_channel_decl(parts, |m| fail(line_no, m))?);
                    }
                    other => {
                        return Err(fail(
                            line_no,
                            format!("unknown declaration '@{}'", other.unwrap_or_default()),
                        ));
                    }
                }
                continue;
            }

            // Video record: tab-separated fields.
            let mut fields = line.split('\t');
            let video_id = fields
                .next()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| fail(line_no, "record lacks a video id".into()))?
                .to_string();
            let label = fields
                .next()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| fail(line_no, format!("video '{video_id}' lacks a class label")))?
                .to_string();
            let mut entry = VideoEntry {
                video_id,
                label,
                frames_dir: None,
                descriptor_paths: BTreeMap::new(),
            };
            for field in fields {
                if field.is_empty() {
                    continue;
                }
                let Some((key, value)) = field.split_once('=') else {
                    return Err(fail(line_no, format!("malformed field '{field}'")));
                };
                if key == "frames" {
                    entry.frames_dir = Some(base.join(value));
                } else if channels.iter().any(|c| c.name == key) {
                    entry.descriptor_paths.insert(key.to_string(), base.join(value));
                } else {
                    return Err(fail(line_no, format!("unknown channel key '{key}'")));
                }
            }
            videos.push(entry);
        }

        let manifest = ExperimentManifest {
            dataset,
            channels,
            videos,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for v in &self.videos {
            if !seen.insert(v.video_id.as_str()) {
                return Err(Error::DuplicateVideo(v.video_id.clone()));
            }
        }
        if self.class_labels().len() < 2 {
            return Err(Error::TooFewClasses);
        }
        for v in &self.videos {
            for c in &self.channels {
                if v.descriptor_paths.contains_key(&c.name) {
                    continue;
                }
                match c.source {
                    ChannelSource::Computed(_) if v.frames_dir.is_some() => {}
                    ChannelSource::Computed(_) => {
                        return Err(Error::UnresolvedChannel {
                            video: v.video_id.clone(),
                            channel: c.name.clone(),
                            reason: "no frames directory and no descriptor path".to_string(),
                        });
                    }
                    ChannelSource::Precomputed => {
                        return Err(Error::UnresolvedChannel {
                            video: v.video_id.clone(),
                            channel: c.name.clone(),
                            reason: "precomputed channels need an explicit descriptor path"
                                .to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Distinct class labels, sorted; the index in this list is the class id
    /// used throughout evaluation.
    pub fn class_labels(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.videos.iter().map(|v| v.label.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    pub fn channel(&self, name: &str) -> Option<&ChannelDecl> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn video(&self, id: &str) -> Option<&VideoEntry> {
        self.videos.iter().find(|v| v.video_id == id)
    }

    /// Where a video's descriptor file for `channel` lives: the explicit
    /// manifest path if present, else `<dir>/<video>.<channel>.potdesc`
    /// under the supplied directory.
    pub fn descriptor_path(
        &self,
        video: &VideoEntry,
        channel: &str,
        fallback_dir: &Path,
    ) -> PathBuf {
        video
            .descriptor_paths
            .get(channel)
            .cloned()
            .unwrap_or_else(|| {
                fallback_dir.join(format!("{}.{}.potdesc", video.video_id, channel))
            })
    }
}

fn parse_channel_decl<'a>(
    parts: impl Iterator<Item = &'a str>,
    fail: impl Fn(String) -> Error,
) -> Result<ChannelDecl> {
    let mut name: Option<String> = None;
    let mut source: Option<&str> = None;
    let mut dim: Option<usize> = None;
    for token in parts {
        if let Some((key, value)) = token.split_once('=') {
            match key {
                "source" => source = Some(value),
                "dim" => {
                    dim = Some(
                        value
                            .parse()
                            .map_err(|_| fail(format!("bad dim '{value}'")))?,
                    )
                }
                other => return Err(fail(format!("unknown channel attribute '{other}'"))),
            }
        } else if name.is_none() {
            name = Some(token.to_string());
        } else {
            return Err(fail(format!("unexpected token '{token}'")));
        }
    }
    let name = name.ok_or_else(|| fail("@channel needs a name".into()))?;
    let source = match source {
        Some("computed") | None => match name.parse::<Channel>() {
            Ok(c) => ChannelSource::Computed(c),
            Err(_) if source.is_none() => ChannelSource::Precomputed,
            Err(_) => {
                return Err(fail(format!(
                    "channel '{name}' cannot be computed (known: hof, hog, mbh)"
                )));
            }
        },
        Some("precomputed") => ChannelSource::Precomputed,
        Some(other) => return Err(fail(format!("unknown source '{other}'"))),
    };
    let expected_dim = dim.or(match source {
        ChannelSource::Computed(c) => Some(c.dim()),
        ChannelSource::Precomputed => None,
    });
    Ok(ChannelDecl {
        name,
        source,
        expected_dim,
    })
}
