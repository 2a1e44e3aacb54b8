//! Numerical thermodynamic formalism for one-dimensional long-range spin chains.

pub mod alphabet;
pub mod concentration;
pub mod config;
pub mod decoupling;
pub mod error;
pub mod gibbs;
pub mod model;
pub mod series;
pub mod stats;
pub mod transfer;

pub use alphabet::SpinAlphabet;
pub use config::{Boundary, HalfLineConfig, LineConfig, Side, Tail, Window};
pub use error::{Error, Result};
pub use series::Bounded;
