//! Decoupling across the origin: crossing bonds, the left-right energy, the
//! half-line densities it induces and the constants controlling them.

mod bonds;
mod constants;
mod density;

pub use bonds::{bond_energy, left_right_energy, Bond, BondOrder};
pub use constants::{
    c1, continuity_constants, integrability_diagnostics, variance_profile, ContinuityConstants,
    IntegrabilityReport, VarianceProfile, C1_DIRECT_TERMS,
};
pub use density::{
    density_estimate, density_estimate_for, density_trend, density_vs_eigenfunction, DensityEstimate, DensityMeta,
    DensityMode, DensityOptions, EigenComparison, EigenTrend, DENSITY_CHAINS, RHAT_LIMIT,
};
