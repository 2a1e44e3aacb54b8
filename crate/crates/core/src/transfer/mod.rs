//! Half-line kernels, the depth-`m` transfer operator and its Markov equilibrium.

pub mod cylinder;
pub mod kernel;
pub mod markov;
pub mod model;

pub use cylinder::CylinderFunction;
pub use kernel::{
    half_line_kernel, half_line_kernel_given, kernel_consistency_check, quasi_normalization_defect, softmax,
    ConsistencyReport, HalfLineEnergy, HalfLineKernel,
};
pub use markov::MarkovEquilibrium;
pub use model::{log_weights, TransferModel, TransferOptions, TransferSummary};
