//! Command-line front end for the `ruelle-core` experiments.

pub mod region;
pub mod run;

pub use region::{classify_region, Region, RegionReport};
pub use run::{exit_code, run, Cli, EXIT_BUDGET, EXIT_DOMAIN, EXIT_USAGE};
