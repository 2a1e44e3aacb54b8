//! Whole-line Gibbs measures on finite windows: Hamiltonians, specification
//! kernels, a heat-bath sampler and the shift experiment.

mod kernels;
mod sampler;
mod shift;
mod window;

pub use kernels::{dlr_consistency_check, single_site_axiom_check, GibbsKernels, PerturbedKernel, SingleSiteKernel};
pub use sampler::{default_burn_in, run_chains, HeatBath, SampleMeta, SampleSet, SamplerState, BURN_IN_PER_SITE};
pub use shift::{shift_convergence_experiment, ShiftReport, ShiftRow, SHIFT_CHAINS};
pub use window::{
    describe, hamiltonian, whole_line_single_site_kernel, window_energy, window_gibbs, window_gibbs_within,
    WindowMeasure, WindowMeta,
};
