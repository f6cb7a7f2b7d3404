//! Repeated random-split evaluation: stratified split plans, per-trial
//! kernel-SVM (or DTW nearest-neighbor) classification, and aggregation
//! into accuracy, confusion-matrix, and per-class F1 summaries.
//!
//! Split plans are first-class values so that one set of plans can be
//! persisted and replayed across every method under comparison — all
//! methods then see identical train/test memberships.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::baselines::classify_dtw;
use crate::classify::{
    chi2_distance_matrix, kernel_from_distances, mean_pairwise_distance, train_svm, KernelMatrix,
};
use crate::error::{Error, Result};
use crate::mat::Matrix;
use crate::model::DescriptorSequence;
use crate::scalar::Real;
use crate::seed;

/// Two-sided 95% normal quantile used for confidence intervals.
const CI95_Z: f64 = 1.96;

/// Train/test membership of one class within one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSplit {
    pub label: String,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// One trial's complete train/test assignment, stratified by class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub trial: usize,
    /// The derived seed that shuffled this trial (recorded for audit).
    pub seed: u64,
    pub classes: Vec<ClassSplit>,
}

impl SplitPlan {
    pub fn train_ids(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().flat_map(|c| c.train.iter().map(String::as_str))
    }

    pub fn test_ids(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().flat_map(|c| c.test.iter().map(String::as_str))
    }
}

/// Builds `trials` independent stratified split plans.
///
/// `classes` pairs each label with its member video ids. Per class of size
/// `s`, `⌊s·train_frac⌋` videos (clamped to `1..=s−1`) are assigned to
/// training and the remainder to testing, so the default fraction 0.5
/// gives the ⌊s/2⌋ train / ⌈s/2⌉ test rule — odd classes put the extra
/// video in the test set. Each trial shuffles with its own seed derived
/// from `(base_seed, "split", trial)`, making plans independent of trial
/// evaluation order.
pub fn make_splits(
    classes: &[(String, Vec<String>)],
    trials: usize,
    base_seed: u64,
    train_frac: f64,
) -> Result<Vec<SplitPlan>> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::BadTrainFraction(train_frac));
    }
    for (label, members) in classes {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                label: label.clone(),
                count: members.len(),
            });
        }
    }
    let plans = (0..trials)
        .map(|trial| {
            let mut rng = seed::rng(base_seed, "split", trial as u64);
            let splits = classes
                .iter()
                .map(|(label, members)| {
                    let mut ids = members.clone();
                    ids.shuffle(&mut rng);
                    let train_n = ((ids.len() as f64 * train_frac).floor() as usize)
                        .clamp(1, ids.len() - 1);
                    let test = ids.split_off(train_n);
                    ClassSplit {
                        label: label.clone(),
                        train: ids,
                        test,
                    }
                })
                .collect();
            SplitPlan {
                trial,
                seed: seed::derive(base_seed, "split", trial as u64),
                classes: splits,
            }
        })
        .collect();
    Ok(plans)
}

/// The evaluation's view of a dataset: unique video ids, sorted class
/// names, and a class id per video.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledVideos {
    video_ids: Vec<String>,
    class_names: Vec<String>,
    class_ids: Vec<usize>,
    index_of: BTreeMap<String, usize>,
}

impl LabeledVideos {
    /// `labels[i]` is the class label of `video_ids[i]`. Class ids are
    /// positions in the sorted list of distinct labels.
    pub fn new(video_ids: Vec<String>, labels: Vec<String>) -> Result<Self> {
        assert_eq!(video_ids.len(), labels.len(), "one label per video");
        let mut index_of = BTreeMap::new();
        for (i, id) in video_ids.iter().enumerate() {
            if index_of.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVideo(id.clone()));
            }
        }
        let class_names: Vec<String> = labels
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if class_names.len() < 2 {
            return Err(Error::TooFewClasses);
        }
        let class_ids = labels
            .iter()
            .map(|l| class_names.binary_search(l).expect("label is in the sorted set"))
            .collect();
        Ok(LabeledVideos {
            video_ids,
            class_names,
            class_ids,
            index_of,
        })
    }

    pub fn len(&self) -> usize {
        self.video_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.video_ids.is_empty()
    }

    pub fn video_ids(&self) -> &[String] {
        &self.video_ids
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.class_ids
    }

    /// Class membership lists in sorted-label order, members in dataset
    /// order — the input shape [`make_splits`] expects.
    pub fn class_members(&self) -> Vec<(String, Vec<String>)> {
        let mut members: Vec<(String, Vec<String>)> = self
            .class_names
            .iter()
            .map(|name| (name.clone(), Vec::new()))
            .collect();
        for (i, id) in self.video_ids.iter().enumerate() {
            members[self.class_ids[i]].1.push(id.clone());
        }
        members
    }

    fn index(&self, id: &str) -> Result<usize> {
        self.index_of
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVideo(id.to_string()))
    }

    /// Resolves a plan's ids into dataset indices, rejecting ids that
    /// appear twice across the plan.
    fn resolve(&self, plan: &SplitPlan) -> Result<(Vec<usize>, Vec<usize>)> {
        let mut seen = BTreeSet::new();
        let mut gather = |ids: &mut dyn Iterator<Item = &str>| -> Result<Vec<usize>> {
            ids.map(|id| {
                let idx = self.index(id)?;
                if !seen.insert(idx) {
                    return Err(Error::DuplicateVideo(id.to_string()));
                }
                Ok(idx)
            })
            .collect()
        };
        let train = gather(&mut plan.train_ids())?;
        let test = gather(&mut plan.test_ids())?;
        Ok((train, test))
    }
}

/// Per-video per-channel feature vectors, assembled incrementally so that
/// holes are reported by video and channel before any evaluation runs.
#[derive(Debug, Clone)]
pub struct FeatureSetBuilder<F> {
    videos: LabeledVideos,
    channels: Vec<String>,
    slots: Vec<Vec<Option<Vec<F>>>>,
}

impl<F: Real> FeatureSetBuilder<F> {
    pub fn new(videos: LabeledVideos, channels: Vec<String>) -> Self {
        assert!(!channels.is_empty(), "need at least one channel");
        let slots = vec![vec![None; videos.len()]; channels.len()];
        FeatureSetBuilder {
            videos,
            channels,
            slots,
        }
    }

    pub fn insert(&mut self, channel: &str, video_id: &str, vector: Vec<F>) -> Result<()> {
        let ci = self
            .channels
            .iter()
            .position(|c| c == channel)
            .ok_or_else(|| Error::UnknownChannel(channel.to_string()))?;
        let vi = self.videos.index(video_id)?;
        self.slots[ci][vi] = Some(vector);
        Ok(())
    }

    pub fn finish(self) -> Result<FeatureSet<F>> {
        let mut vectors = Vec::with_capacity(self.channels.len());
        for (ci, slot_row) in self.slots.into_iter().enumerate() {
            let mut channel_vectors = Vec::with_capacity(slot_row.len());
            for (vi, slot) in slot_row.into_iter().enumerate() {
                match slot {
                    Some(v) => channel_vectors.push(v),
                    None => {
                        return Err(Error::MissingFeature {
                            video: self.videos.video_ids[vi].clone(),
                            channel: self.channels[ci].clone(),
                        })
                    }
                }
            }
            vectors.push(channel_vectors);
        }
        Ok(FeatureSet {
            videos: self.videos,
            channels: self.channels,
            vectors,
        })
    }
}

/// A complete feature table: one vector per video per channel.
#[derive(Debug, Clone)]
pub struct FeatureSet<F> {
    videos: LabeledVideos,
    channels: Vec<String>,
    vectors: Vec<Vec<Vec<F>>>,
}

impl<F: Real> FeatureSet<F> {
    /// Builds directly from aligned per-channel vector lists
    /// (`vectors[channel][video]`).
    pub fn from_vectors(
        videos: LabeledVideos,
        channels: Vec<String>,
        vectors: Vec<Vec<Vec<F>>>,
    ) -> Self {
        assert_eq!(vectors.len(), channels.len(), "one vector list per channel");
        for list in &vectors {
            assert_eq!(list.len(), videos.len(), "one vector per video");
        }
        FeatureSet {
            videos,
            channels,
            vectors,
        }
    }

    pub fn videos(&self) -> &LabeledVideos {
        &self.videos
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }
}

/// Precision, recall, and F1 of one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-class precision/recall/F1 from a square confusion matrix of
/// true-row × predicted-column counts. A zero denominator (no predictions
/// or no true instances of a class) yields 0 for that statistic.
pub fn f1_from_confusion(confusion: &Matrix<u64>) -> Vec<ClassMetrics> {
    assert_eq!(
        confusion.rows(),
        confusion.cols(),
        "confusion matrix must be square"
    );
    let k = confusion.rows();
    (0..k)
        .map(|c| {
            let tp = confusion[(c, c)] as f64;
            let col: u64 = (0..k).map(|r| confusion[(r, c)]).sum();
            let row: u64 = (0..k).map(|p| confusion[(c, p)]).sum();
            let precision = if col == 0 { 0.0 } else { tp / col as f64 };
            let recall = if row == 0 { 0.0 } else { tp / row as f64 };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                precision,
                recall,
                f1,
            }
        })
        .collect()
}

/// One trial's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub accuracy: f64,
    pub confusion: Matrix<u64>,
    pub metrics: Vec<ClassMetrics>,
    /// Per-channel γ computed on this trial's training set (empty for
    /// methods without a kernel, e.g. DTW).
    pub gammas: Vec<f64>,
}

impl TrialResult {
    fn from_confusion(trial: usize, confusion: Matrix<u64>, gammas: Vec<f64>) -> Self {
        let total: u64 = confusion.data().iter().sum();
        let trace: u64 = (0..confusion.rows()).map(|c| confusion[(c, c)]).sum();
        let accuracy = if total == 0 {
            0.0
        } else {
            trace as f64 / total as f64
        };
        let metrics = f1_from_confusion(&confusion);
        TrialResult {
            trial,
            accuracy,
            confusion,
            metrics,
            gammas,
        }
    }
}

/// Aggregated outcome of all trials of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub class_names: Vec<String>,
    pub channels: Vec<String>,
    pub trials: Vec<TrialResult>,
    /// Mean of per-trial accuracies.
    pub mean_accuracy: f64,
    /// Half-width of the 95% normal-approximation interval over trial
    /// accuracies (0 when fewer than 2 trials).
    pub accuracy_ci95: f64,
    /// Per-class mean F1 over trials.
    pub mean_f1: Vec<f64>,
    /// Confusion counts summed over all trials.
    pub total_confusion: Matrix<u64>,
    /// Per-channel mean γ over trials (empty for DTW).
    pub mean_gammas: Vec<f64>,
    /// SVM regularization constant, when the method used one.
    pub svm_c: Option<f64>,
}

impl ExperimentReport {
    fn aggregate(
        class_names: Vec<String>,
        channels: Vec<String>,
        trials: Vec<TrialResult>,
        svm_c: Option<f64>,
    ) -> Self {
        assert!(!trials.is_empty(), "aggregate needs at least one trial");
        let accuracies: Vec<f64> = trials.iter().map(|t| t.accuracy).collect();
        let (mean_accuracy, accuracy_ci95) = mean_and_ci95(&accuracies);
        let k = class_names.len();
        let mut mean_f1 = vec![0.0f64; k];
        let mut total_confusion = Matrix::filled(k, k, 0u64);
        for t in &trials {
            for (c, m) in t.metrics.iter().enumerate() {
                mean_f1[c] += m.f1;
            }
            for r in 0..k {
                for p in 0..k {
                    total_confusion[(r, p)] += t.confusion[(r, p)];
                }
            }
        }
        for v in &mut mean_f1 {
            *v /= trials.len() as f64;
        }
        let n_channels = trials[0].gammas.len();
        let mut mean_gammas = vec![0.0f64; n_channels];
        for t in &trials {
            for (c, &g) in t.gammas.iter().enumerate() {
                mean_gammas[c] += g;
            }
        }
        for v in &mut mean_gammas {
            *v /= trials.len() as f64;
        }
        ExperimentReport {
            class_names,
            channels,
            trials,
            mean_accuracy,
            accuracy_ci95,
            mean_f1,
            total_confusion,
            mean_gammas,
            svm_c,
        }
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.accuracy).collect()
    }
}

/// Mean and 95% CI half-width (normal approximation, sample standard
/// deviation) of a list of values; the half-width is 0 for fewer than two
/// values.
pub fn mean_and_ci95(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty(), "need at least one value");
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, CI95_Z * var.sqrt() / n.sqrt())
}

/// Runs the full protocol: per trial, compute per-channel γ on the
/// training set, assemble the multi-channel χ² kernel, train a one-vs-rest
/// SVM with constant `c`, and classify the test set.
///
/// Pairwise χ² distances are computed once per channel and shared across
/// trials; only γ (and therefore the kernel values) is trial-specific,
/// which keeps the protocol leak-free while avoiding redundant distance
/// work. Trials run in parallel; results are keyed by trial index, so
/// aggregation is independent of completion order.
pub fn run_experiment<F: Real>(
    features: &FeatureSet<F>,
    plans: &[SplitPlan],
    c: f64,
) -> Result<ExperimentReport> {
    if plans.is_empty() {
        return Err(Error::ZeroTrials);
    }
    let distances: Vec<Matrix<f64>> = features
        .channels
        .iter()
        .enumerate()
        .map(|(ci, name)| chi2_distance_matrix(&features.vectors[ci], name).map(|(m, _)| m))
        .collect::<Result<_>>()?;
    let trials: Vec<TrialResult> = plans
        .par_iter()
        .map(|plan| run_svm_trial(features, &distances, plan, c))
        .collect::<Result<_>>()?;
    Ok(ExperimentReport::aggregate(
        features.videos.class_names.clone(),
        features.channels.clone(),
        trials,
        Some(c),
    ))
}

fn run_svm_trial<F: Real>(
    features: &FeatureSet<F>,
    distances: &[Matrix<f64>],
    plan: &SplitPlan,
    c: f64,
) -> Result<TrialResult> {
    let (train, test) = features.videos.resolve(plan)?;
    let gammas: Vec<f64> = distances
        .iter()
        .enumerate()
        .map(|(ci, d)| {
            let gamma = mean_pairwise_distance(d, &train);
            if gamma <= 0.0 {
                Err(Error::NonPositiveGamma { channel: ci, gamma })
            } else {
                Ok(gamma)
            }
        })
        .collect::<Result<_>>()?;
    let gram = kernel_from_distances(distances, &train, &train, &gammas)?;
    let kernel = KernelMatrix::new(gram, gammas.clone())?;
    let train_labels: Vec<usize> = train.iter().map(|&i| features.videos.class_ids[i]).collect();
    let model = train_svm(&kernel, &train_labels, c)?;
    let test_rows = kernel_from_distances(distances, &test, &train, &gammas)?;

    let k = features.videos.class_names.len();
    let mut confusion = Matrix::filled(k, k, 0u64);
    for (r, &vi) in test.iter().enumerate() {
        let (predicted, _) = model.predict(test_rows.row(r))?;
        confusion[(features.videos.class_ids[vi], predicted)] += 1;
    }
    Ok(TrialResult::from_confusion(plan.trial, confusion, gammas))
}

/// Runs the same protocol with 1-nearest-neighbor DTW classification on
/// raw descriptor sequences (`sequences[i]` belongs to `videos` entry
/// `i`), under the same split plans the kernel methods use.
pub fn run_dtw_experiment<F: Real>(
    videos: &LabeledVideos,
    sequences: &[DescriptorSequence<F>],
    plans: &[SplitPlan],
) -> Result<ExperimentReport> {
    assert_eq!(sequences.len(), videos.len(), "one sequence per video");
    if plans.is_empty() {
        return Err(Error::ZeroTrials);
    }
    let trials: Vec<TrialResult> = plans
        .par_iter()
        .map(|plan| {
            let (train, test) = videos.resolve(plan)?;
            let references: Vec<(&DescriptorSequence<F>, usize)> = train
                .iter()
                .map(|&i| (&sequences[i], videos.class_ids[i]))
                .collect();
            let outcomes: Vec<(usize, usize)> = test
                .par_iter()
                .map(|&vi| {
                    classify_dtw(&references, &sequences[vi])
                        .map(|(predicted, _)| (videos.class_ids[vi], predicted))
                })
                .collect::<Result<_>>()?;
            let k = videos.class_names.len();
            let mut confusion = Matrix::filled(k, k, 0u64);
            for (actual, predicted) in outcomes {
                confusion[(actual, predicted)] += 1;
            }
            Ok(TrialResult::from_confusion(plan.trial, confusion, Vec::new()))
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentReport::aggregate(
        videos.class_names.clone(),
        Vec::new(),
        trials,
        None,
    ))
}

/// Spread of mean accuracy across quantizer re-seeds (BoW or IFV trained
/// with different clustering seeds, each evaluated under the same split
/// plans).
#[derive(Debug, Clone, PartialEq)]
pub struct ReseedSummary {
    pub accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub ci95: f64,
}

impl ReseedSummary {
    pub fn from_reports(reports: &[ExperimentReport]) -> Self {
        let accuracies: Vec<f64> = reports.iter().map(|r| r.mean_accuracy).collect();
        let (mean_accuracy, ci95) = mean_and_ci95(&accuracies);
        ReseedSummary {
            accuracies,
            mean_accuracy,
            ci95,
        }
    }
}
