//! Core stability of the grand coalition under the equal-split rule.
//!
//! A coalition `S` facing outsider structure `P_j` leaves the grand
//! coalition only if `v(S)/s > v(N)/n`. Equality counts as stable.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{CoalitionStructure, MarketParams};
use crate::partitions::{enumerate_partitions, max_worth_partition, min_worth_partition, partition_count, PartCount};
use crate::report::{csv_field, fmt_num, fmt_parts};
use crate::worth::{coalition_worth, WorthReport};

/// Relative slack under which a negative margin is still treated as a tie.
pub const TIE_RTOL: f64 = 1e-12;

/// `margin ≥ 0` up to [`TIE_RTOL`] relative to the grand per-agent payoff.
pub fn is_stable(margin: f64, grand_per_agent: f64) -> bool {
    margin >= -TIE_RTOL * grand_per_agent.abs()
}

/// The belief a deviating coalition holds about the outsiders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BeliefMode {
    /// A specific outsider partition.
    GivenPartition(Vec<usize>),
    /// `j` coalitions, split so that the deviation is least attractive.
    FixedJPessimistic(usize),
    /// `j` coalitions, split so that the deviation is most attractive.
    FixedJOptimistic(usize),
    /// Least attractive structure over every `j`.
    GlobalPessimistic,
    /// Most attractive structure over every `j`.
    GlobalOptimistic,
}

impl BeliefMode {
    pub fn kind(&self) -> BeliefKind {
        match self {
            BeliefMode::GivenPartition(_) => BeliefKind::GivenPartition,
            BeliefMode::FixedJPessimistic(_) => BeliefKind::FixedJPessimistic,
            BeliefMode::FixedJOptimistic(_) => BeliefKind::FixedJOptimistic,
            BeliefMode::GlobalPessimistic => BeliefKind::GlobalPessimistic,
            BeliefMode::GlobalOptimistic => BeliefKind::GlobalOptimistic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeliefKind {
    GivenPartition,
    FixedJPessimistic,
    FixedJOptimistic,
    GlobalPessimistic,
    GlobalOptimistic,
}

impl fmt::Display for BeliefKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BeliefKind::GivenPartition => "given-partition",
            BeliefKind::FixedJPessimistic => "fixed-j-pessimistic",
            BeliefKind::FixedJOptimistic => "fixed-j-optimistic",
            BeliefKind::GlobalPessimistic => "global-pessimistic",
            BeliefKind::GlobalOptimistic => "global-optimistic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    /// `v(N)/n - v(S)/s`.
    pub margin: f64,
    pub worth: WorthReport,
    pub belief_mode: BeliefKind,
    /// The evaluated partition is a balanced stand-in for a non-integral
    /// equal split.
    pub extrapolated: bool,
}

impl StabilityVerdict {
    pub fn structure(&self) -> &CoalitionStructure {
        &self.worth.structure
    }

    fn from_worth(worth: WorthReport, belief_mode: BeliefKind, extrapolated: bool) -> Self {
        let margin = worth.margin();
        StabilityVerdict {
            stable: is_stable(margin, worth.grand_per_agent),
            margin,
            worth,
            belief_mode,
            extrapolated,
        }
    }
}

fn require_deviation(params: &MarketParams, s: usize) -> Result<()> {
    if s < 1 || s >= params.n() {
        return Err(Error::domain(format!(
            "deviating coalition must satisfy 1 <= s < n, got s={s}, n={}",
            params.n()
        )));
    }
    Ok(())
}

/// Compares `v(N)/n` with `v(S)/s` for one outsider structure.
pub fn core_check(params: &MarketParams, structure: &CoalitionStructure) -> Result<StabilityVerdict> {
    require_deviation(params, structure.s())?;
    let worth = coalition_worth(params, structure)?;
    Ok(StabilityVerdict::from_worth(worth, BeliefKind::GivenPartition, false))
}

/// Evaluates the structure the belief selects.
pub fn belief_verdict(params: &MarketParams, s: usize, mode: &BeliefMode) -> Result<StabilityVerdict> {
    require_deviation(params, s)?;
    let n = params.n();
    let m = n - s;
    let evaluate = |parts: Vec<usize>, extrapolated: bool| -> Result<StabilityVerdict> {
        let structure = CoalitionStructure::new(n, s, parts)?;
        let worth = coalition_worth(params, &structure)?;
        Ok(StabilityVerdict::from_worth(worth, mode.kind(), extrapolated))
    };
    match mode {
        BeliefMode::GivenPartition(parts) => evaluate(parts.clone(), false),
        BeliefMode::FixedJPessimistic(j) => {
            let p = min_worth_partition(m, *j)?;
            evaluate(p.parts, p.extrapolated)
        }
        BeliefMode::FixedJOptimistic(j) => {
            let p = max_worth_partition(m, *j)?;
            evaluate(p.parts, p.extrapolated)
        }
        BeliefMode::GlobalPessimistic | BeliefMode::GlobalOptimistic => {
            let pessimistic = matches!(mode, BeliefMode::GlobalPessimistic);
            let mut best: Option<StabilityVerdict> = None;
            for j in 1..=m {
                let p = if pessimistic {
                    min_worth_partition(m, j)?
                } else {
                    max_worth_partition(m, j)?
                };
                let v = evaluate(p.parts, p.extrapolated)?;
                let better = match &best {
                    None => true,
                    Some(b) if pessimistic => v.worth.v_s < b.worth.v_s,
                    Some(b) => v.worth.v_s > b.worth.v_s,
                };
                if better {
                    best = Some(v);
                }
            }
            Ok(best.expect("m >= 1 gives at least one candidate"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub zeta: f64,
    pub n: usize,
    pub s: usize,
    pub gamma: f64,
    /// `ζ < n - s`, so some admissible `j` lies above the threshold.
    pub feasible: bool,
}

impl ThresholdReport {
    /// Smallest integer strictly greater than `ζ`.
    pub fn first_j_above(&self) -> usize {
        self.zeta.floor() as usize + 1
    }
}

fn check_threshold_domain(n: usize, s: usize) -> Result<()> {
    if n < 2 || s < 1 || s >= n {
        return Err(Error::domain(format!(
            "threshold requires 1 <= s < n, got s={s}, n={n}"
        )));
    }
    Ok(())
}

/// Belief threshold for `γ ∈ (0, 1]`:
///
/// ```text
/// ζ = 2 (sqrt(ν / σ) - 1) / (1 + (1 - γ) / σ),   σ = 1 + γ(s - 1), ν = 1 + γ(n - 1)
/// ```
///
/// The core inequality is equivalent to `Σ_k γ s_k / (γ s_k + 2(1 - γ)) ≥ ζ`.
pub fn threshold_zeta(n: usize, s: usize, gamma: f64) -> Result<ThresholdReport> {
    check_threshold_domain(n, s)?;
    if gamma < 0.0 && gamma > -1.0 {
        return Err(Error::domain(format!(
            "zeta is defined only for gamma in (0, 1], got gamma={gamma}; negative gamma (complements) has no \
             belief threshold, run `scan` to check every outsider structure"
        )));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::domain(format!(
            "zeta is defined only for gamma in (0, 1], got gamma={gamma}"
        )));
    }
    let sigma = 1.0 + gamma * (s as f64 - 1.0);
    let nu = 1.0 + gamma * (n as f64 - 1.0);
    let zeta = 2.0 * ((nu / sigma).sqrt() - 1.0) / (1.0 + (1.0 - gamma) / sigma);
    Ok(ThresholdReport {
        zeta,
        n,
        s,
        gamma,
        feasible: zeta < (n - s) as f64,
    })
}

/// Homogeneous-goods threshold `2 (sqrt(n / s) - 1)`.
pub fn threshold_gamma1(n: usize, s: usize) -> Result<f64> {
    check_threshold_domain(n, s)?;
    Ok(2.0 * ((n as f64 / s as f64).sqrt() - 1.0))
}

/// Left-hand side of the threshold form of the core inequality,
/// `Σ_k γ s_k / (γ s_k + 2(1 - γ))`.
pub fn belief_sum(gamma: f64, outsiders: &[usize]) -> f64 {
    outsiders
        .iter()
        .map(|&sk| gamma * sk as f64 / (gamma * sk as f64 + 2.0 * (1.0 - gamma)))
        .sum()
}

/// Bounds on exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanLimits {
    pub max_n: usize,
    pub max_cells: u128,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for ScanLimits {
    fn default() -> Self {
        ScanLimits {
            max_n: 16,
            max_cells: 2_000_000,
            threads: None,
        }
    }
}

impl ScanLimits {
    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    fn run<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            None => Ok(f()),
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t.max(1))
                    .build()
                    .map_err(|e| Error::domain(format!("cannot build thread pool: {e}")))?;
                Ok(pool.install(f))
            }
        }
    }
}

/// One `(s, partition)` evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCell {
    pub s: usize,
    pub j: usize,
    pub partition: Vec<usize>,
    pub v_s: f64,
    pub per_agent: f64,
    pub margin: f64,
    pub stable: bool,
}

/// Per-`s` aggregate of an exhaustive scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub s: usize,
    pub cells: usize,
    pub unstable: usize,
    /// Smallest `J` such that every `j ≥ J` has all partitions stable.
    pub empirical_jstar: Option<usize>,
    /// Threshold, for `γ ∈ (0, 1]`.
    pub zeta: Option<f64>,
    /// Smallest integer above `ζ`.
    pub zeta_first_j: Option<usize>,
    /// Every `j > ζ` had all partitions stable.
    pub zeta_sufficient: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub a: f64,
    pub c: f64,
    pub gamma: f64,
    pub n: usize,
    pub total_cells: usize,
    pub unstable_cells: usize,
    pub per_s: Vec<SizeSummary>,
    #[serde(skip)]
    pub cells: Vec<ScanCell>,
}

pub const SCAN_CSV_HEADER: &str = "s,j,partition,v_s,per_agent,margin,stable";

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.cells.len() + 1));
        out.push_str(SCAN_CSV_HEADER);
        out.push('\n');
        for cell in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                cell.s,
                cell.j,
                csv_field(&fmt_parts(&cell.partition)),
                fmt_num(cell.v_s),
                fmt_num(cell.per_agent),
                fmt_num(cell.margin),
                cell.stable
            ));
        }
        out
    }

    /// True when every evaluated cell was stable.
    pub fn all_stable(&self) -> bool {
        self.unstable_cells == 0
    }
}

fn evaluate_cell(params: &MarketParams, s: usize, partition: Vec<usize>) -> Result<ScanCell> {
    let structure = CoalitionStructure::new(params.n(), s, partition)?;
    let worth = coalition_worth(params, &structure)?;
    let margin = worth.margin();
    Ok(ScanCell {
        s,
        j: structure.j(),
        stable: is_stable(margin, worth.grand_per_agent),
        v_s: worth.v_s,
        per_agent: worth.per_agent,
        margin,
        partition: structure.outsiders().to_vec(),
    })
}

/// Every deviating size `s < n`, every `j` and every partition of `n - s`
/// into `j` parts.
pub fn exhaustive_scan(params: &MarketParams, limits: &ScanLimits) -> Result<ScanReport> {
    let n = params.n();
    if n > limits.max_n {
        return Err(Error::BudgetExceeded(format!(
            "n={n} exceeds the scan bound max_n={}",
            limits.max_n
        )));
    }
    let total: u128 = (1..n)
        .flat_map(|s| (1..=n - s).map(move |j| partition_count(n - s, j)))
        .sum();
    if total > limits.max_cells {
        return Err(Error::BudgetExceeded(format!(
            "{total} cells exceed the cap of {}",
            limits.max_cells
        )));
    }

    let mut tasks = Vec::with_capacity(total as usize);
    for s in 1..n {
        for j in 1..=n - s {
            for p in enumerate_partitions(n - s, PartCount::Exactly(j))? {
                tasks.push((s, p));
            }
        }
    }
    let cells: Vec<ScanCell> = limits.run(|| {
        tasks
            .into_par_iter()
            .map(|(s, p)| evaluate_cell(params, s, p))
            .collect::<Result<Vec<_>>>()
    })??;

    let gamma = params.gamma();
    let per_s = (1..n)
        .map(|s| {
            let mine: Vec<&ScanCell> = cells.iter().filter(|c| c.s == s).collect();
            let unstable_at = |j: usize| mine.iter().any(|c| c.j == j && !c.stable);
            let empirical_jstar = (1..=n - s).rev().take_while(|&j| !unstable_at(j)).last();
            let threshold = if gamma > 0.0 {
                Some(threshold_zeta(n, s, gamma)?)
            } else {
                None
            };
            let zeta_sufficient = threshold
                .as_ref()
                .map(|t| (t.first_j_above()..=n - s).all(|j| !unstable_at(j)));
            Ok(SizeSummary {
                s,
                cells: mine.len(),
                unstable: mine.iter().filter(|c| !c.stable).count(),
                empirical_jstar,
                zeta: threshold.as_ref().map(|t| t.zeta),
                zeta_first_j: threshold.as_ref().map(ThresholdReport::first_j_above),
                zeta_sufficient,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ScanReport {
        a: params.a(),
        c: params.c(),
        gamma,
        n,
        total_cells: cells.len(),
        unstable_cells: cells.iter().filter(|c| !c.stable).count(),
        per_s,
        cells,
    })
}

/// Stability of every partition with `j` outsider coalitions for one `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierRow {
    pub j: usize,
    pub partitions: usize,
    pub unstable: usize,
    /// Every partition into `j` parts is stable.
    pub all_stable: bool,
    pub worst_margin: f64,
    pub worst_partition: Vec<usize>,
    /// Verdict for the equal (balanced) split.
    pub balanced_stable: bool,
    pub balanced_margin: f64,
}

/// For a fixed deviating size, evaluates every partition of `n - s` for
/// each `j` and reports whether the whole row is stable.
pub fn frontier(params: &MarketParams, s: usize, limits: &ScanLimits) -> Result<Vec<FrontierRow>> {
    require_deviation(params, s)?;
    let m = params.n() - s;
    let total: u128 = (1..=m).map(|j| partition_count(m, j)).sum();
    if total > limits.max_cells {
        return Err(Error::BudgetExceeded(format!(
            "{total} partitions exceed the cap of {}",
            limits.max_cells
        )));
    }
    let rows = limits.run(|| {
        (1..=m)
            .into_par_iter()
            .map(|j| frontier_row(params, s, j))
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(rows)
}

fn frontier_row(params: &MarketParams, s: usize, j: usize) -> Result<FrontierRow> {
    let m = params.n() - s;
    let mut partitions = 0;
    let mut unstable = 0;
    let mut worst: Option<ScanCell> = None;
    for p in enumerate_partitions(m, PartCount::Exactly(j))? {
        let cell = evaluate_cell(params, s, p)?;
        partitions += 1;
        if !cell.stable {
            unstable += 1;
        }
        if worst.as_ref().is_none_or(|w| cell.margin < w.margin) {
            worst = Some(cell);
        }
    }
    let worst = worst.expect("1 <= j <= m has at least one partition");
    let balanced = evaluate_cell(params, s, min_worth_partition(m, j)?.parts)?;
    Ok(FrontierRow {
        j,
        partitions,
        unstable,
        all_stable: unstable == 0,
        worst_margin: worst.margin,
        worst_partition: worst.partition,
        balanced_stable: balanced.stable,
        balanced_margin: balanced.margin,
    })
}
