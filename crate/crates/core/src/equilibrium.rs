//! Symmetric Cournot–Nash equilibrium per coalition.
//!
//! Every coalition acts as one player; by intra-coalitional symmetry all of
//! its members produce the same quantity. Coalition `0` is the deviating
//! coalition `S`, coalitions `1..=j` are the outsiders.
//!
//! Two routes are provided. [`closed_form_equilibrium`] evaluates
//!
//! ```text
//! λ_k = γ s_k - 2γ + 2
//! A_i = Σ_{k≠i} s_k (2 + γ s_i - 2γ) / λ_k
//! y_i = (a - c) / (2[1 + γ(s_i - 1)] + γ A_i)
//! ```
//!
//! and [`solve_foc_system`] solves the first-order conditions of all `n`
//! agents directly, without assuming symmetry, so that it can serve as an
//! independent check of the closed form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::market::{CoalitionStructure, MarketParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumProfile {
    /// Coalition sizes `s_0, s_1, …, s_j`.
    pub sizes: Vec<usize>,
    /// Per-agent quantity of each coalition.
    pub y: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub big_a: Vec<f64>,
    /// Denominator of `y_0`.
    pub c0: f64,
    /// Equilibrium price faced by a member of each coalition.
    pub prices: Vec<f64>,
}

impl EquilibriumProfile {
    /// Total output `Σ s_k y_k`.
    pub fn total_output(&self) -> f64 {
        self.sizes.iter().zip(&self.y).map(|(&s, y)| s as f64 * y).sum()
    }

    pub fn has_nonpositive_price(&self) -> bool {
        self.prices.iter().any(|&p| p <= 0.0)
    }
}

pub(crate) fn lambda(gamma: f64, size: usize) -> f64 {
    gamma * size as f64 - 2.0 * gamma + 2.0
}

/// `C_0 = 2[1 + γ(s - 1)] + γ λ_0 Σ_{k≥1} s_k / λ_k`, the denominator of
/// the deviating coalition's quantity. Linear in the number of coalitions.
pub fn deviator_c0(params: &MarketParams, structure: &CoalitionStructure) -> Result<f64> {
    check_dims(params, structure)?;
    let gamma = params.gamma();
    let lambda0 = lambda(gamma, structure.s());
    let mut weight = 0.0;
    for &sk in structure.outsiders() {
        let lk = lambda(gamma, sk);
        if !(lk > 0.0) {
            return Err(Error::DegenerateSystem(format!(
                "lambda for outsider size {sk} = {lk} is not positive"
            )));
        }
        weight += sk as f64 / lk;
    }
    let c0 = 2.0 * (1.0 + gamma * (structure.s() as f64 - 1.0)) + gamma * lambda0 * weight;
    if !(lambda0 > 0.0 && c0 > 0.0) {
        return Err(Error::DegenerateSystem(format!("C_0 = {c0} is not positive")));
    }
    Ok(c0)
}

/// Closed-form symmetric equilibrium.
pub fn closed_form_equilibrium(params: &MarketParams, structure: &CoalitionStructure) -> Result<EquilibriumProfile> {
    check_dims(params, structure)?;
    let gamma = params.gamma();
    let sizes = structure.sizes();
    let lambdas: Vec<f64> = sizes.iter().map(|&s| lambda(gamma, s)).collect();
    if let Some((k, l)) = lambdas.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
        return Err(Error::DegenerateSystem(format!("lambda_{k} = {l} is not positive")));
    }
    // Σ_k s_k / λ_k over every coalition; A_i drops term i.
    let weights: Vec<f64> = sizes.iter().zip(&lambdas).map(|(&s, l)| s as f64 / l).collect();

    let mut big_a = Vec::with_capacity(sizes.len());
    let mut y = Vec::with_capacity(sizes.len());
    let mut c0 = f64::NAN;
    for (i, &si) in sizes.iter().enumerate() {
        let others: f64 = weights
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, w)| w)
            .sum();
        let a_i = lambdas[i] * others;
        let denom = 2.0 * (1.0 + gamma * (si as f64 - 1.0)) + gamma * a_i;
        if !(denom > 0.0) {
            return Err(Error::DegenerateSystem(format!(
                "denominator of y_{i} = {denom} is not positive"
            )));
        }
        if i == 0 {
            c0 = denom;
        }
        big_a.push(a_i);
        y.push(params.margin() / denom);
    }
    let prices = prices(params, &sizes, &y);
    Ok(EquilibriumProfile {
        sizes,
        y,
        lambdas,
        big_a,
        c0,
        prices,
    })
}

fn prices(params: &MarketParams, sizes: &[usize], y: &[f64]) -> Vec<f64> {
    let total: f64 = sizes.iter().zip(y).map(|(&s, y)| s as f64 * y).sum();
    y.iter()
        .map(|&yi| params.a() - yi - params.gamma() * (total - yi))
        .collect()
}

fn check_dims(params: &MarketParams, structure: &CoalitionStructure) -> Result<()> {
    if params.n() != structure.n() {
        return Err(Error::domain(format!(
            "structure has n={} but params have n={}",
            structure.n(),
            params.n()
        )));
    }
    Ok(())
}

/// Residuals of the reduced first-order system,
/// `2 y_i - (a - c - 2γ(s_i - 1) y_i - γ Σ_{k≠i} s_k y_k)`.
pub fn foc_residuals(params: &MarketParams, sizes: &[usize], y: &[f64]) -> Vec<f64> {
    let gamma = params.gamma();
    let total: f64 = sizes.iter().zip(y).map(|(&s, y)| s as f64 * y).sum();
    sizes
        .iter()
        .zip(y)
        .map(|(&si, &yi)| {
            let others = total - si as f64 * yi;
            2.0 * yi - (params.margin() - 2.0 * gamma * (si as f64 - 1.0) * yi - gamma * others)
        })
        .collect()
}

/// Equilibrium from the full `n`-agent first-order system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEquilibrium {
    pub sizes: Vec<usize>,
    /// Quantity of every agent; agents of coalition `k` are contiguous.
    pub quantities: Vec<f64>,
    /// Per-coalition mean quantity.
    pub y: Vec<f64>,
    /// Largest `|q_i - y_k| / |y_k|` over the members of each coalition.
    pub max_spread: f64,
}

impl OracleEquilibrium {
    /// Coalition index of every agent.
    pub fn labels(&self) -> Vec<usize> {
        agent_labels(&self.sizes)
    }
}

fn agent_labels(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(k, &s)| std::iter::repeat_n(k, s))
        .collect()
}

/// The `n × n` first-order matrix: `2` on the diagonal, `2γ` between
/// coalition mates and `γ` between rivals.
pub fn foc_matrix(params: &MarketParams, structure: &CoalitionStructure) -> DenseMatrix {
    let labels = agent_labels(&structure.sizes());
    let gamma = params.gamma();
    DenseMatrix::from_fn(labels.len(), |r, c| match (r == c, labels[r] == labels[c]) {
        (true, _) => 2.0,
        (false, true) => 2.0 * gamma,
        (false, false) => gamma,
    })
}

/// Solves the first-order conditions at full dimension and collapses the
/// result to per-coalition quantities.
pub fn solve_foc_system(params: &MarketParams, structure: &CoalitionStructure) -> Result<OracleEquilibrium> {
    check_dims(params, structure)?;
    let sizes = structure.sizes();
    let m = foc_matrix(params, structure);
    let quantities = m.solve(&vec![params.margin(); m.dim()])?;

    let mut y = Vec::with_capacity(sizes.len());
    let mut max_spread = 0.0_f64;
    let mut start = 0;
    for &s in &sizes {
        let members = &quantities[start..start + s];
        let mean = members.iter().sum::<f64>() / s as f64;
        for q in members {
            max_spread = max_spread.max((q - mean).abs() / mean.abs());
        }
        y.push(mean);
        start += s;
    }
    Ok(OracleEquilibrium {
        sizes,
        quantities,
        y,
        max_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn duopoly() {
        let p = MarketParams::new(10.0, 1.0, 1.0, 2).unwrap();
        let st = CoalitionStructure::new(2, 1, vec![1]).unwrap();
        let eq = closed_form_equilibrium(&p, &st).unwrap();
        assert!(rel(eq.y[0], 3.0) < 1e-15 && rel(eq.y[1], 3.0) < 1e-15);
        // P = 10 - 6 = 4
        assert!(rel(eq.prices[0], 4.0) < 1e-15);
    }

    #[test]
    fn homogeneous_goods_quantities() {
        // γ = 1: y_i = (a - c) / (s_i (2 + j))
        let p = MarketParams::new(10.0, 1.0, 1.0, 12).unwrap();
        let st = CoalitionStructure::new(12, 3, vec![5, 3, 1]).unwrap();
        let eq = closed_form_equilibrium(&p, &st).unwrap();
        for (&s, &y) in eq.sizes.iter().zip(&eq.y) {
            assert!(rel(y, 9.0 / (s as f64 * 5.0)) < 1e-14, "s={s} y={y}");
        }
    }

    #[test]
    fn triopoly_oracle() {
        let p = MarketParams::new(10.0, 1.0, 1.0, 3).unwrap();
        let st = CoalitionStructure::new(3, 1, vec![1, 1]).unwrap();
        let oracle = solve_foc_system(&p, &st).unwrap();
        for q in &oracle.quantities {
            assert!(rel(*q, 2.25) < 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_oracle_small() {
        let p = MarketParams::new(10.0, 1.0, 0.5, 5).unwrap();
        let st = CoalitionStructure::new(5, 2, vec![2, 1]).unwrap();
        let eq = closed_form_equilibrium(&p, &st).unwrap();
        let oracle = solve_foc_system(&p, &st).unwrap();
        for (a, b) in eq.y.iter().zip(&oracle.y) {
            assert!(rel(*a, *b) < 1e-9);
        }
        assert!(foc_residuals(&p, &eq.sizes, &eq.y).iter().all(|r| r.abs() < 1e-9 * 9.0));
    }

    #[test]
    fn grand_coalition_empty_outsider_sum() {
        let p = MarketParams::new(10.0, 1.0, 0.3, 7).unwrap();
        let st = CoalitionStructure::grand(7).unwrap();
        let eq = closed_form_equilibrium(&p, &st).unwrap();
        assert_eq!(eq.big_a, vec![0.0]);
        assert!(rel(eq.c0, 2.0 * (1.0 + 0.3 * 6.0)) < 1e-15);
        let oracle = solve_foc_system(&p, &st).unwrap();
        assert!(rel(eq.y[0], oracle.y[0]) < 1e-12);
    }

    #[test]
    fn figure_scenario_oracle_symmetry() {
        let p = MarketParams::new(10.0, 1.0, 0.9, 46).unwrap();
        let st = CoalitionStructure::new(46, 4, vec![7; 6]).unwrap();
        let oracle = solve_foc_system(&p, &st).unwrap();
        assert!(oracle.quantities.iter().all(|q| q.is_finite() && *q > 0.0));
        assert!(oracle.max_spread < 1e-10, "spread {}", oracle.max_spread);
    }

    #[test]
    fn invariants_hold_for_negative_gamma() {
        let p = MarketParams::new(10.0, 1.0, -0.09, 12).unwrap();
        let st = CoalitionStructure::new(12, 2, vec![7, 1, 1, 1]).unwrap();
        let eq = closed_form_equilibrium(&p, &st).unwrap();
        assert!(eq.y.iter().all(|&y| y > 0.0));
        assert!(eq.lambdas.iter().all(|&l| l > 0.0));
        assert!(eq.big_a.iter().all(|&a| a > 0.0));
        // ratio law y_k λ_k = y_i (2 + γ s_i - 2γ)
        for k in 0..eq.y.len() {
            assert!(rel(eq.y[k] * eq.lambdas[k], eq.y[0] * eq.lambdas[0]) < 1e-13);
        }
    }

    #[test]
    fn mismatched_n_rejected() {
        let p = MarketParams::new(10.0, 1.0, 0.5, 6).unwrap();
        let st = CoalitionStructure::new(5, 2, vec![3]).unwrap();
        assert!(matches!(closed_form_equilibrium(&p, &st), Err(Error::Domain(_))));
        assert!(matches!(solve_foc_system(&p, &st), Err(Error::Domain(_))));
    }
}
