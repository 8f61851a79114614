use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cournot_core::market::{DEFAULT_A, DEFAULT_C};
use cournot_core::{CoalitionStructure, MarketParams, ScenarioConfig};

use crate::CliError;

/// Cournot–Nash equilibria, coalition worths and core stability of a
/// cooperating network under coalitional beliefs.
#[derive(Debug, Parser)]
#[command(name = "cournot", version, about)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-coalition equilibrium quantities, λ, A, C_0 and prices.
    Equilibrium(Common),
    /// Worth of the deviating coalition against the grand-coalition benchmark.
    Worth(Common),
    /// Belief threshold ζ = j*(n, s, γ).
    Jstar(Common),
    /// Exhaustive core check over every deviating size and outsider partition.
    Scan(Common),
    /// Plot-ready data for the worth-extremes and stability-frontier figures.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Demand intercept (default 10).
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Unit cost (default 1).
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Differentiation parameter γ ∈ (-1, 1], γ ≠ 0.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Number of agents.
    #[arg(long)]
    pub n: Option<usize>,
    /// Size of the deviating coalition.
    #[arg(long)]
    pub s: Option<usize>,
    /// Outsider coalition sizes as a comma list; "" when s = n.
    #[arg(long)]
    pub outsiders: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Cross-check against the full-dimension first-order solve.
    #[arg(long)]
    pub check: bool,
    /// Worker threads for scans.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Seed for sampled cross-checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scenario JSON: {"a":…, "c":…, "gamma":…, "n":…, "s":…, "outsiders":[…]}.
    /// Flags given explicitly take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// Which figure: 1 (worth extremes) or 2 (stability frontier).
    #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
    pub which: u8,
    /// Number of outsider coalitions for figure 1 (default 6).
    #[arg(long)]
    pub j: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

/// Flags merged over an optional config file.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub a: f64,
    pub c: f64,
    pub gamma: Option<f64>,
    pub n: Option<usize>,
    pub s: Option<usize>,
    pub outsiders: Option<Vec<usize>>,
}

pub fn parse_outsiders(raw: &str) -> Result<Vec<usize>, CliError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Validation(format!("invalid outsider size {:?}", tok.trim())))
        })
        .collect()
}

impl Common {
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let file: Option<ScenarioConfig> = match &self.config {
            None => None,
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
                Some(
                    serde_json::from_str(&text)
                        .map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))?,
                )
            }
        };
        let outsiders = match &self.outsiders {
            Some(raw) => Some(parse_outsiders(raw)?),
            None => file.as_ref().and_then(|f| f.outsiders.clone()),
        };
        Ok(Scenario {
            a: self.a.or(file.as_ref().map(|f| f.a)).unwrap_or(DEFAULT_A),
            c: self.c.or(file.as_ref().map(|f| f.c)).unwrap_or(DEFAULT_C),
            gamma: self.gamma.or(file.as_ref().map(|f| f.gamma)),
            n: self.n.or(file.as_ref().map(|f| f.n)),
            s: self.s.or(file.as_ref().and_then(|f| f.s)),
            outsiders,
        })
    }
}

impl Scenario {
    pub fn with_defaults(mut self, gamma: f64, n: usize, s: usize) -> Self {
        self.gamma.get_or_insert(gamma);
        self.n.get_or_insert(n);
        self.s.get_or_insert(s);
        self
    }

    pub fn params(&self) -> Result<MarketParams, CliError> {
        let gamma = self
            .gamma
            .ok_or_else(|| CliError::Validation("missing --gamma".into()))?;
        let n = self.n.ok_or_else(|| CliError::Validation("missing --n".into()))?;
        Ok(MarketParams::new(self.a, self.c, gamma, n)?)
    }

    pub fn s(&self) -> Result<usize, CliError> {
        self.s.ok_or_else(|| CliError::Validation("missing --s".into()))
    }

    pub fn structure(&self) -> Result<CoalitionStructure, CliError> {
        let n = self.n.ok_or_else(|| CliError::Validation("missing --n".into()))?;
        let s = self.s()?;
        let outsiders = match (&self.outsiders, s == n) {
            (Some(o), _) => o.clone(),
            (None, true) => Vec::new(),
            (None, false) => return Err(CliError::Validation("missing --outsiders".into())),
        };
        Ok(CoalitionStructure::new(n, s, outsiders)?)
    }
}
