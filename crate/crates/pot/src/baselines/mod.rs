//! Comparison representations evaluated against PoT: bag-of-visual-words,
//! improved Fisher vectors, and DTW template matching, all consuming the
//! same per-frame descriptor sequences.

pub mod bow;
pub mod dtw;
pub mod gmm;
pub mod ifv;
pub mod kmeans;

pub use bow::encode_bow;
pub use dtw::{classify_dtw, dtw_distance};
pub use gmm::{train_gmm, train_gmm_traced, GaussianMixture, GmmFit};
pub use ifv::{encode_ifv, fisher_vector};
pub use kmeans::{train_codebook, Codebook};

/// Conventional vocabulary size for bag-of-words.
pub const DEFAULT_BOW_K: usize = 400;

/// Conventional mixture size for Fisher vectors: 10 components for the
/// 200/400-D histogram channels, 5 for 4096-D activations (keeping encoded
/// sizes at 4000-D and 40960-D respectively).
pub fn default_ifv_k(descriptor_dim: usize) -> usize {
    if descriptor_dim >= 4096 {
        5
    } else {
        10
    }
}
