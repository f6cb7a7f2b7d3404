//! Classification stack: χ² distances, the exponential multi-channel
//! kernel, and a kernel SVM trained by sequential minimal optimization.

pub mod chi2;
pub mod kernel;
pub mod svm;

pub use chi2::{chi2_distance, chi2_distance_abs};
pub use kernel::{
    chi2_distance_matrix, kernel_from_distances, mean_pairwise_distance, multichannel_kernel,
    KernelMatrix,
};
pub use svm::{train_svm, SvmModel};
