//! Evaluation report rendering: a structured text document with sections
//! `[params]`, `[per-trial]`, `[aggregate]`, `[confusion]`, and
//! `[per-class-f1]`, plus an optional `[reseed]` section for quantizer
//! re-seed studies.
//!
//! All numbers use Rust's shortest round-trip float formatting, so a report
//! is byte-identical across runs with equal inputs.

use std::fmt::Write as _;

use crate::evaluation::{ExperimentReport, ReseedSummary};

/// Renders a report. `params` lines (key/value, in order) are written at
/// the top of `[params]` by the caller — command, seed, input digests, and
/// similar run metadata. The renderer appends the keys it owns: `trials`,
/// `classes`, `channels`, and `svm_c`.
pub fn render_report(report: &ExperimentReport, params: &[(String, String)]) -> String {
    let mut out = String::new();

    let _ = writeln!(out, "[params]");
    for (key, value) in params {
        let _ = writeln!(out, "{key}={value}");
    }
    let _ = writeln!(out, "trials={}", report.trials.len());
    let _ = writeln!(out, "classes={}", report.class_names.len());
    if !report.channels.is_empty() {
        let _ = writeln!(out, "channels={}", report.channels.join(","));
    }
    if let Some(c) = report.svm_c {
        let _ = writeln!(out, "svm_c={c}");
    }

    let _ = writeln!(out, "\n[per-trial]");
    for t in &report.trials {
        let _ = write!(out, "trial={} accuracy={}", t.trial, t.accuracy);
        for (name, gamma) in report.channels.iter().zip(&t.gammas) {
            let _ = write!(out, " gamma.{name}={gamma}");
        }
        let _ = writeln!(out);
    }

    let _ = writeln!(out, "\n[aggregate]");
    let _ = writeln!(out, "mean_accuracy={}", report.mean_accuracy);
    let _ = writeln!(out, "accuracy_ci95={}", report.accuracy_ci95);
    for (name, gamma) in report.channels.iter().zip(&report.mean_gammas) {
        let _ = writeln!(out, "mean_gamma.{name}={gamma}");
    }

    let _ = writeln!(out, "\n[confusion]");
    let _ = writeln!(out, "# true class x predicted class, counts summed over trials");
    let _ = writeln!(out, "true\\pred\t{}", report.class_names.join("\t"));
    for (r, name) in report.class_names.iter().enumerate() {
        let _ = write!(out, "{name}");
        for p in 0..report.class_names.len() {
            let _ = write!(out, "\t{}", report.total_confusion[(r, p)]);
        }
        let _ = writeln!(out);
    }

    let _ = writeln!(out, "\n[per-class-f1]");
    for (name, f1) in report.class_names.iter().zip(&report.mean_f1) {
        let _ = writeln!(out, "{name}\t{f1}");
    }

    out
}

/// Renders the `[reseed]` section: accuracy spread over quantizer
/// re-seeds, each evaluated under identical split plans.
pub fn render_reseed(summary: &ReseedSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\n[reseed]");
    let _ = writeln!(out, "reseeds={}", summary.accuracies.len());
    for (i, accuracy) in summary.accuracies.iter().enumerate() {
        let _ = writeln!(out, "reseed={i} mean_accuracy={accuracy}");
    }
    let _ = writeln!(out, "mean_accuracy={}", summary.mean_accuracy);
    let _ = writeln!(out, "accuracy_ci95={}", summary.ci95);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{make_splits, run_experiment, FeatureSet, LabeledVideos};

    fn small_report() -> ExperimentReport {
        let mut video_ids = Vec::new();
        let mut labels = Vec::new();
        let mut vectors = Vec::new();
        for c in 0..3 {
            for v in 0..4 {
                video_ids.push(format!("c{c}v{v}"));
                labels.push(format!("class{c}"));
                let mut x = vec![0.0f64; 3];
                x[c] = 1.0;
                vectors.push(x);
            }
        }
        let videos = LabeledVideos::new(video_ids, labels).unwrap();
        let features =
            FeatureSet::from_vectors(videos, vec!["hof".to_string()], vec![vectors]);
        let plans = make_splits(&features.videos().class_members(), 3, 5, 0.5).unwrap();
        run_experiment(&features, &plans, 100.0).unwrap()
    }

    #[test]
    fn report_sections_appear_in_order() {
        let report = small_report();
        let text = render_report(
            &report,
            &[("method".to_string(), "pot".to_string()), ("seed".to_string(), "5".to_string())],
        );
        let positions: Vec<usize> = ["[params]", "[per-trial]", "[aggregate]", "[confusion]", "[per-class-f1]"]
            .iter()
            .map(|s| text.find(s).unwrap_or_else(|| panic!("missing section {s}")))
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("method=pot"));
        assert!(text.contains("svm_c=100"));
        assert!(text.contains("trial=0 accuracy=1 gamma.hof="));
        assert!(text.contains("mean_accuracy=1"));
        assert!(text.contains("mean_gamma.hof="));
        assert!(text.contains("class0\t6\t0\t0"));
        assert!(text.contains("class2\t1"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let report = small_report();
        let params = [("seed".to_string(), "5".to_string())];
        assert_eq!(render_report(&report, &params), render_report(&report, &params));
    }

    #[test]
    fn reseed_section_lists_every_run() {
        let report = small_report();
        let summary =
            crate::evaluation::ReseedSummary::from_reports(&[report.clone(), report]);
        let text = render_reseed(&summary);
        assert!(text.contains("[reseed]"));
        assert!(text.contains("reseeds=2"));
        assert!(text.contains("reseed=0 mean_accuracy=1"));
        assert!(text.contains("reseed=1 mean_accuracy=1"));
        assert!(text.contains("accuracy_ci95=0"));
    }
}
