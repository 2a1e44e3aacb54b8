//! Potentials, pair interactions and their regularity functionals.

pub mod birkhoff;
pub mod chain;
pub mod coupling;
pub mod interaction;
pub mod potential;
pub mod regularity;

pub use birkhoff::birkhoff_sum;
pub use chain::ChainEnergy;
pub use coupling::{Coupling, CouplingLaw, PowerEnvelope};
pub use interaction::{beta_du, PairForm, PairInteraction, DEFAULT_TOLERANCE};
pub use potential::{PotentialKind, PotentialSpec, TabulatedCoupling, DEFAULT_TRUNCATION};
pub use regularity::{
    extensibility_defect, extensibility_defect_bound, good_future_sum, walters_diagnostic, RegularityOptions,
    RegularityReport,
};
