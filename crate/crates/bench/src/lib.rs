//! Fixed scenarios shared by the benchmarks.

use cournot_core::{CoalitionStructure, MarketParams};

/// The 46-agent network with a 4-agent deviating coalition at γ = 0.9.
pub fn figure_params() -> MarketParams {
    MarketParams::new(10.0, 1.0, 0.9, 46).expect("valid scenario")
}

/// Outsiders split equally into six coalitions of seven.
pub fn figure_structure() -> CoalitionStructure {
    CoalitionStructure::new(46, 4, vec![7; 6]).expect("valid structure")
}
