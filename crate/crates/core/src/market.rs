//! Economic environment and coalition-structure data.
//!
//! Agent `i` faces the inverse demand `P_i = a - q_i - γ Σ_{l≠i} q_l` and
//! produces at constant unit cost `c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default demand intercept. Arbitrary: worths scale with `(a - c)^2` and
/// stability verdicts do not depend on it.
pub const DEFAULT_A: f64 = 10.0;
/// Default unit cost.
pub const DEFAULT_C: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketParams {
    a: f64,
    c: f64,
    gamma: f64,
    n: usize,
}

impl MarketParams {
    /// Validates `(a, c, γ, n)`.
    ///
    /// Requires `0 < c < a`, `γ ∈ (-1, 1]`, `γ ≠ 0`, `n ≥ 2` and condition K,
    /// `γ > -1/(n-1)`, which guarantees an interior Cournot equilibrium.
    pub fn new(a: f64, c: f64, gamma: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain(format!("demand intercept a must be positive, got {a}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::domain(format!("unit cost c must be positive, got {c}")));
        }
        if c >= a {
            return Err(Error::domain(format!(
                "unit cost c must be below a, got c={c} >= a={a}"
            )));
        }
        if !gamma.is_finite() {
            return Err(Error::domain(format!("gamma must be finite, got {gamma}")));
        }
        if gamma == 0.0 {
            return Err(Error::domain("gamma must be non-zero"));
        }
        if gamma <= -1.0 || gamma > 1.0 {
            return Err(Error::domain(format!("gamma must lie in (-1, 1], got {gamma}")));
        }
        if n < 2 {
            return Err(Error::domain(format!("n must be at least 2, got {n}")));
        }
        let bound = -1.0 / (n - 1) as f64;
        if gamma <= bound {
            return Err(Error::domain(format!(
                "condition K violated: gamma <= -1/(n-1) (gamma={gamma}, -1/(n-1)={bound})"
            )));
        }
        Ok(MarketParams { a, c, gamma, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The demand margin `a - c`.
    pub fn margin(&self) -> f64 {
        self.a - self.c
    }

    /// Same `γ` and `n` with a different `(a, c)`.
    pub fn with_costs(&self, a: f64, c: f64) -> Result<Self> {
        MarketParams::new(a, c, self.gamma, self.n)
    }
}

/// A deviating coalition of size `s` facing outsiders grouped into
/// coalitions of the given sizes. Outsider sizes are kept sorted
/// non-increasing so equal multisets compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CoalitionStructure {
    n: usize,
    s: usize,
    outsiders: Vec<usize>,
}

impl CoalitionStructure {
    pub fn new(n: usize, s: usize, mut outsiders: Vec<usize>) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("n must be at least 2, got {n}")));
        }
        if s < 1 || s > n {
            return Err(Error::domain(format!(
                "coalition size s must satisfy 1 <= s <= n, got s={s}, n={n}"
            )));
        }
        if outsiders.contains(&0) {
            return Err(Error::domain("outsider coalition sizes must be at least 1"));
        }
        let total: usize = outsiders.iter().sum();
        if total != n - s {
            return Err(Error::domain(format!(
                "outsider sizes sum to {total}, expected n - s = {}",
                n - s
            )));
        }
        outsiders.sort_unstable_by(|x, y| y.cmp(x));
        Ok(CoalitionStructure { n, s, outsiders })
    }

    /// The grand coalition: `s = n`, no outsiders.
    pub fn grand(n: usize) -> Result<Self> {
        CoalitionStructure::new(n, n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn outsiders(&self) -> &[usize] {
        &self.outsiders
    }

    /// Number of outsider coalitions `j`.
    pub fn j(&self) -> usize {
        self.outsiders.len()
    }

    pub fn is_grand(&self) -> bool {
        self.s == self.n
    }

    /// All coalition sizes, the deviating coalition first.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.outsiders.len() + 1);
        sizes.push(self.s);
        sizes.extend_from_slice(&self.outsiders);
        sizes
    }
}

/// JSON exchange document for a single scenario:
/// `{"a":…, "c":…, "gamma":…, "n":…, "s":…, "outsiders":[…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    pub gamma: f64,
    pub n: usize,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub outsiders: Option<Vec<usize>>,
}

fn default_a() -> f64 {
    DEFAULT_A
}

fn default_c() -> f64 {
    DEFAULT_C
}

impl ScenarioConfig {
    pub fn params(&self) -> Result<MarketParams> {
        MarketParams::new(self.a, self.c, self.gamma, self.n)
    }

    /// Builds the structure; requires both `s` and `outsiders` (an empty
    /// list when `s = n`).
    pub fn structure(&self) -> Result<CoalitionStructure> {
        let s = self.s.ok_or_else(|| Error::domain("scenario is missing s"))?;
        let outsiders = match (&self.outsiders, s == self.n) {
            (Some(o), _) => o.clone(),
            (None, true) => Vec::new(),
            (None, false) => return Err(Error::domain("scenario is missing outsiders")),
        };
        CoalitionStructure::new(self.n, s, outsiders)
    }
}
