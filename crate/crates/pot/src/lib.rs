//! Pooled time-series (PoT) video feature representations.
//!
//! A video is first turned into a sequence of per-frame descriptors (HOF,
//! HOG, MBH, or precomputed high-dimensional vectors). Each descriptor
//! dimension is then read as a time series, pooled over a temporal filter
//! bank with several operators (sum, max, and two gradient histograms), and
//! the pooled values are concatenated into one vector per video. The crate
//! also ships the usual comparison encoders (bag of visual words, improved
//! Fisher vectors, DTW template matching), a chi-square kernel SVM trained
//! by SMO, and a repeated random-split evaluation harness.
//!
//! All numeric kernels are generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); concrete aliases for the common types live at the crate
//! root.

pub mod baselines;
pub mod classify;
pub mod descriptors;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod mat;
pub mod model;
pub mod pooling;
pub mod scalar;
pub mod seed;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases used by the CLI and most call sites. Kernel
/// matrices and SVM models always hold `f64` and need no alias.
pub type DescriptorSequence64 = model::DescriptorSequence<f64>;
pub type PotVector64 = pooling::PotVector<f64>;
pub type FlowField64 = descriptors::FlowField<f64>;
pub type Codebook64 = baselines::Codebook<f64>;
pub type GaussianMixture64 = baselines::GaussianMixture<f64>;

/// Single-precision aliases for memory-bound pipelines.
pub type DescriptorSequence32 = model::DescriptorSequence<f32>;
pub type PotVector32 = pooling::PotVector<f32>;
pub type FlowField32 = descriptors::FlowField<f32>;
pub type Codebook32 = baselines::Codebook<f32>;
pub type GaussianMixture32 = baselines::GaussianMixture<f32>;
