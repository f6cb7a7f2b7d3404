//! Kernel SVM trained by sequential minimal optimization (SMO) on the dual,
//! with one-vs-rest multiclass reduction.
//!
//! Each binary problem minimizes `½ αᵀQα − Σα` subject to `0 ≤ α_i ≤ C` and
//! `Σ y_i α_i = 0`, where `Q_ij = y_i y_j K_ij`. The working pair is the
//! maximal violating pair; convergence is declared when the KKT violation
//! `m(α) − M(α)` drops below 1e-3.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mat::Matrix;

use super::KernelMatrix;

/// KKT violation threshold.
const TOLERANCE: f64 = 1e-3;
/// Curvature guard for degenerate (non-PSD or duplicate-point) pairs.
const TAU: f64 = 1e-12;
/// Hard cap on SMO iterations per binary problem.
const MAX_ITERATIONS: usize = 1_000_000;

/// One converged binary (one-vs-rest) subproblem.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BinarySolution {
    /// Signed coefficients `α_i y_i` over the training set.
    pub alpha_y: Vec<f64>,
    pub bias: f64,
    /// Indices with `α_i > 0`.
    pub support: Vec<usize>,
    /// Dual objective `Σα − ½αᵀQα` after every update (non-decreasing).
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

impl BinarySolution {
    /// Decision value for a point given its kernel row vs the training set.
    fn decide(&self, kernel_row: &[f64]) -> f64 {
        let mut f = self.bias;
        for &i in &self.support {
            f += self.alpha_y[i] * kernel_row[i];
        }
        f
    }
}

/// Solves one binary problem. `y` holds ±1 labels.
pub(crate) fn solve_binary(kernel: &Matrix<f64>, y: &[f64], c: f64) -> Result<BinarySolution> {
    let n = y.len();
    assert_eq!(kernel.rows(), n, "kernel size must match label count");
    assert!(c > 0.0, "C must be positive");
    debug_assert!(y.iter().all(|&v| v == 1.0 || v == -1.0));

    let mut alpha = vec![0.0f64; n];
    // Gradient of the dual objective: g_i = (Qα)_i − 1; starts at −1.
    let mut g = vec![-1.0f64; n];
    let mut objective_trace = vec![0.0f64];
    let mut iterations = 0usize;
    let mut violation = f64::INFINITY;

    while iterations < MAX_ITERATIONS {
        // Maximal violating pair over I_up (room to increase y·α) and
        // I_low (room to decrease); ties keep the lowest index.
        let mut i_up: Option<(usize, f64)> = None;
        let mut j_low: Option<(usize, f64)> = None;
        for t in 0..n {
            let v = -y[t] * g[t];
            let upward = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
            let downward = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c);
            if upward && i_up.map_or(true, |(_, best)| v > best) {
                i_up = Some((t, v));
            }
            if downward && j_low.map_or(true, |(_, best)| v < best) {
                j_low = Some((t, v));
            }
        }
        let (Some((i, m_up)), Some((j, m_low))) = (i_up, j_low) else {
            break; // No feasible direction (e.g. all-one-class edge case).
        };
        violation = m_up - m_low;
        if violation < TOLERANCE {
            break;
        }

        // Step along (α_i += y_i t, α_j −= y_j t), clipped to the box.
        let quad = kernel[(i, i)] + kernel[(j, j)] - 2.0 * kernel[(i, j)];
        let mut t_step = violation / quad.max(TAU);
        let room_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let room_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        t_step = t_step.min(room_i).min(room_j);

        alpha[i] += y[i] * t_step;
        alpha[j] -= y[j] * t_step;
        for (t, slot) in g.iter_mut().enumerate() {
            *slot += t_step * y[t] * (kernel[(t, i)] - kernel[(t, j)]);
        }
        iterations += 1;
        // Dual objective via the gradient identity αᵀQα = αᵀg + Σα.
        let sum_alpha: f64 = alpha.iter().sum();
        let alpha_g: f64 = alpha.iter().zip(&g).map(|(a, gi)| a * gi).sum();
        objective_trace.push(0.5 * (sum_alpha - alpha_g));
    }
    if violation >= TOLERANCE && iterations >= MAX_ITERATIONS {
        return Err(Error::NoConvergence {
            iterations,
            violation,
        });
    }

    // Bias from free support vectors (where −y_i g_i = b exactly), falling
    // back to the midpoint of the violation bounds when none are free.
    let free: Vec<usize> = (0..n)
        .filter(|&t| alpha[t] > 0.0 && alpha[t] < c)
        .collect();
    let bias = if free.is_empty() {
        let m_up = (0..n)
            .filter(|&t| (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0))
            .map(|t| -y[t] * g[t])
            .fold(f64::NEG_INFINITY, f64::max);
        let m_low = (0..n)
            .filter(|&t| (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c))
            .map(|t| -y[t] * g[t])
            .fold(f64::INFINITY, f64::min);
        0.5 * (m_up + m_low)
    } else {
        free.iter().map(|&t| -y[t] * g[t]).sum::<f64>() / free.len() as f64
    };

    let support: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let alpha_y: Vec<f64> = alpha.iter().zip(y).map(|(a, yi)| a * yi).collect();
    Ok(BinarySolution {
        alpha_y,
        bias,
        support,
        objective_trace,
        iterations,
    })
}

/// A trained one-vs-rest multiclass kernel SVM.
#[derive(Debug, Clone)]
pub struct SvmModel {
    class_ids: Vec<usize>,
    machines: Vec<BinarySolution>,
    c: f64,
    train_size: usize,
}

impl SvmModel {
    pub fn class_ids(&self) -> &[usize] {
        &self.class_ids
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn train_size(&self) -> usize {
        self.train_size
    }

    /// Dual-objective traces of the one-vs-rest subproblems, in
    /// `class_ids` order. Each trace is non-decreasing — SMO ascends the
    /// dual — which makes this the cheapest external convergence check.
    pub fn objective_traces(&self) -> Vec<&[f64]> {
        self.machines
            .iter()
            .map(|m| m.objective_trace.as_slice())
            .collect()
    }

    /// Predicts from a row of kernel values against the training set, in
    /// training order. Returns the winning class id and the per-class
    /// decision values (aligned with `class_ids`); ties go to the lowest
    /// class id.
    pub fn predict(&self, kernel_row: &[f64]) -> Result<(usize, Vec<f64>)> {
        if kernel_row.len() != self.train_size {
            return Err(Error::DimensionMismatch {
                context: "SVM prediction kernel row".to_string(),
                expected: self.train_size,
                actual: kernel_row.len(),
            });
        }
        let scores: Vec<f64> = self.machines.iter().map(|m| m.decide(kernel_row)).collect();
        let mut best = 0usize;
        for (k, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = k;
            }
        }
        Ok((self.class_ids[best], scores))
    }
}

/// Trains one-vs-rest SVMs over a precomputed training kernel.
///
/// `labels[i]` is the class id of training video `i`. Binary subproblems
/// are independent and solved in parallel; the model is deterministic for a
/// fixed kernel and label assignment.
pub fn train_svm(kernel: &KernelMatrix, labels: &[usize], c: f64) -> Result<SvmModel> {
    assert_eq!(kernel.n(), labels.len(), "one label per kernel row");
    assert!(c > 0.0, "C must be positive");
    let mut class_ids: Vec<usize> = labels.to_vec();
    class_ids.sort_unstable();
    class_ids.dedup();
    if class_ids.len() < 2 {
        return Err(Error::SingleClass(class_ids.len()));
    }

    let machines = class_ids
        .par_iter()
        .map(|&class| {
            let y: Vec<f64> = labels
                .iter()
                .map(|&l| if l == class { 1.0 } else { -1.0 })
                .collect();
            solve_binary(kernel.values(), &y, c)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SvmModel {
        class_ids,
        machines,
        c,
        train_size: labels.len(),
    })
}
