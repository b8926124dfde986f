//! Prior-independent threshold auctions, their benchmark mechanisms, and
//! reproducible Monte-Carlo verification of the revenue guarantees they satisfy.

pub mod bounds;
pub mod characterization;
pub mod dist;
pub mod error;
pub mod estimation;
pub mod instances;
pub mod mechanisms;
pub mod rng;

pub use dist::{Family, RegularSummary, ValueDistribution};
pub use error::{Error, Result};
pub use estimation::{McConfig, Mechanism, RevenueEstimate};
pub use instances::{Instance, MixedInstance};
pub use mechanisms::{Outcome, ThresholdSpec, ValueProfile};
