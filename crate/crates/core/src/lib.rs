//! Cournot–Nash equilibria and coalition worths for a network of symmetric
//! agents under differentiated Cournot competition, together with the core
//! stability analysis of the grand coalition under coalitional beliefs.
//!
//! A deviating coalition `S` of size `s` evaluates its worth against a
//! belief about how the `n - s` outsiders organise themselves. Only the
//! coalition sizes matter, so every structure is described by `s` plus a
//! multiset of outsider sizes.
//!
//! ```
//! use cournot_core::{CoalitionStructure, MarketParams, stability};
//!
//! let params = MarketParams::new(10.0, 1.0, 0.9, 46).unwrap();
//! let structure = CoalitionStructure::new(46, 4, vec![7; 6]).unwrap();
//! let verdict = stability::core_check(&params, &structure).unwrap();
//! assert!(verdict.stable);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod error;
pub mod linalg;
pub mod market;
pub mod partitions;
pub mod report;
pub mod stability;
pub mod worth;

pub use equilibrium::{closed_form_equilibrium, solve_foc_system, EquilibriumProfile, OracleEquilibrium};
pub use error::{Error, Result};
pub use market::{CoalitionStructure, MarketParams, ScenarioConfig};
pub use partitions::{
    enumerate_partitions, max_worth_partition, min_worth_partition, ExtremalPartition, PartCount, PartitionSet,
};
pub use stability::{
    belief_verdict, core_check, exhaustive_scan, threshold_gamma1, threshold_zeta, BeliefMode, ScanLimits, ScanReport,
    StabilityVerdict, ThresholdReport,
};
pub use worth::{coalition_worth, grand_worth, WorthReport};
