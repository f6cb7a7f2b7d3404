//! Persistence of split plans, so one set of train/test assignments can be
//! replayed across methods and sessions.
//!
//! Format: a header line `POT-SPLITS v1 trials=<t> seed=<s>`, then one
//! tab-separated record per (trial, class):
//!
//! ```text
//! <trial>\t<trial-seed>\t<class-label>\t<train-ids-csv>\t<test-ids-csv>
//! ```
//!
//! Lines starting with `#` and blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::{ClassSplit, SplitPlan};

const HEADER_PREFIX: &str = "POT-SPLITS v1";

/// A parsed split-plan file: the base seed that generated the plans plus
/// the plans themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitsFile {
    pub base_seed: u64,
    pub plans: Vec<SplitPlan>,
}

/// Renders plans to the text format.
pub fn render_splits(plans: &[SplitPlan], base_seed: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER_PREFIX} trials={} seed={}", plans.len(), base_seed);
    for plan in plans {
        for class in &plan.classes {
            debug_assert!(
                plan.train_ids().chain(plan.test_ids()).all(|id| {
                    !id.contains('\t') && !id.contains(',') && !id.is_empty()
                }),
                "video ids must be tab- and comma-free"
            );
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                plan.trial,
                plan.seed,
                class.label,
                class.train.join(","),
                class.test.join(",")
            );
        }
    }
    out
}

pub fn write_splits(
    path: &Path,
    plans: &[SplitPlan],
    base_seed: u64,
    no_clobber: bool,
) -> Result<()> {
    super::write_file(path, render_splits(plans, base_seed).as_bytes(), no_clobber)
}

pub fn read_splits(path: &Path) -> Result<SplitsFile> {
    let text = super::read_to_string(path)?;
    parse_splits(&text, path)
}

fn parse_splits(text: &str, origin: &Path) -> Result<SplitsFile> {
    let fail = |line: usize, message: String| Error::SplitsFormat {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| fail(1, "file is empty".to_string()))?;
    let rest = header.strip_prefix(HEADER_PREFIX).ok_or_else(|| {
        fail(
            header_line,
            format!("expected header '{HEADER_PREFIX} ...', found '{header}'"),
        )
    })?;
    let mut trials: Option<usize> = None;
    let mut base_seed: Option<u64> = None;
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| fail(header_line, format!("malformed header field '{token}'")))?;
        match key {
            "trials" => {
                trials = Some(value.parse().map_err(|_| {
                    fail(header_line, format!("bad trial count '{value}'"))
                })?)
            }
            "seed" => {
                base_seed = Some(value.parse().map_err(|_| {
                    fail(header_line, format!("bad seed '{value}'"))
                })?)
            }
            _ => {} // Unknown header fields are ignored for forward compatibility.
        }
    }
    let trials =
        trials.ok_or_else(|| fail(header_line, "header is missing 'trials='".to_string()))?;
    let base_seed =
        base_seed.ok_or_else(|| fail(header_line, "header is missing 'seed='".to_string()))?;

    let mut plans: Vec<SplitPlan> = Vec::with_capacity(trials);
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(fail(
                line_no,
                format!("expected 5 tab-separated fields, found {}", fields.len()),
            ));
        }
        let trial: usize = fields[0]
            .parse()
            .map_err(|_| fail(line_no, format!("bad trial index '{}'", fields[0])))?;
        let seed: u64 = fields[1]
            .parse()
            .map_err(|_| fail(line_no, format!("bad trial seed '{}'", fields[1])))?;
        let label = fields[2].to_string();
        if label.is_empty() {
            return Err(fail(line_no, "empty class label".to_string()));
        }
        let parse_ids = |csv: &str, side: &str| -> Result<Vec<String>> {
            let ids: Vec<String> = csv
                .split(',')
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            if ids.is_empty() {
                return Err(fail(line_no, format!("{side} id list is empty")));
            }
            Ok(ids)
        };
        let train = parse_ids(fields[3], "train")?;
        let test = parse_ids(fields[4], "test")?;
        for id in train.iter().chain(&test) {
            if train.iter().chain(&test).filter(|o| *o == id).count() > 1 {
                return Err(fail(
                    line_no,
                    format!("video id '{id}' appears more than once in the record"),
                ));
            }
        }
        let class = ClassSplit { label, train, test };
        match plans.last_mut() {
            Some(last) if last.trial == trial => {
                if last.seed != seed {
                    return Err(fail(
                        line_no,
                        format!(
                            "trial {trial} lists conflicting seeds {} and {seed}",
                            last.seed
                        ),
                    ));
                }
                last.classes.push(class);
            }
            Some(last) if trial < last.trial => {
                return Err(fail(
                    line_no,
                    format!("trial {trial} appears after trial {}", last.trial),
                ));
            }
            _ => plans.push(SplitPlan {
                trial,
                seed,
                classes: vec![class],
            }),
        }
    }
    if plans.len() != trials {
        return Err(fail(
            text.lines().count(),
            format!("header declares {trials} trials but file holds {}", plans.len()),
        ));
    }
    Ok(SplitsFile { base_seed, plans })
}
