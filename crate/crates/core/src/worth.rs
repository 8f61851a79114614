//! Coalition worth under a given outsider structure, and the worth of the
//! grand coalition.

use serde::Serialize;

use crate::equilibrium::{deviator_c0, OracleEquilibrium};
use crate::error::Result;
use crate::market::{CoalitionStructure, MarketParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorthReport {
    /// Total equilibrium profit of the deviating coalition.
    pub v_s: f64,
    /// `v_s / s`, the equal-split payoff of a member of `S`.
    pub per_agent: f64,
    /// Worth of the grand coalition.
    pub v_n: f64,
    /// `v_n / n`.
    pub grand_per_agent: f64,
    pub structure: CoalitionStructure,
}

impl WorthReport {
    /// `v(N)/n - v(S)/s`; non-negative when no member of `S` gains by deviating.
    pub fn margin(&self) -> f64 {
        self.grand_per_agent - self.per_agent
    }
}

/// `v(S) = s (1 + γ(s - 1)) ((a - c) / C_0)^2`.
///
/// Each member of `S` earns `(P_0 - c) y_0` and the first-order condition
/// gives `P_0 - c = (1 + γ(s - 1)) y_0` with `y_0 = (a - c) / C_0`.
pub fn coalition_worth(params: &MarketParams, structure: &CoalitionStructure) -> Result<WorthReport> {
    let c0 = deviator_c0(params, structure)?;
    let s = structure.s() as f64;
    let sigma = 1.0 + params.gamma() * (s - 1.0);
    let ratio = params.margin() / c0;
    let v_s = s * sigma * ratio * ratio;
    let v_n = grand_worth(params);
    Ok(WorthReport {
        v_s,
        per_agent: v_s / s,
        v_n,
        grand_per_agent: v_n / params.n() as f64,
        structure: structure.clone(),
    })
}

/// `v(N) = n (a - c)^2 / (4 (1 + γ(n - 1)))`.
pub fn grand_worth(params: &MarketParams) -> f64 {
    let n = params.n() as f64;
    let m = params.margin();
    n * m * m / (4.0 * (1.0 + params.gamma() * (n - 1.0)))
}

/// Profit of coalition `S` by direct price-times-quantity accounting over
/// the agent quantities of an oracle solve:
/// `Σ_{i∈S} (a - q_i - γ Σ_{l≠i} q_l - c) q_i`.
pub fn accounting_worth(params: &MarketParams, oracle: &OracleEquilibrium) -> f64 {
    let total: f64 = oracle.quantities.iter().sum();
    let s = oracle.sizes[0];
    oracle.quantities[..s]
        .iter()
        .map(|&q| (params.a() - q - params.gamma() * (total - q) - params.c()) * q)
        .sum()
}
