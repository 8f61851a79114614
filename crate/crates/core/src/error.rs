use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violates the model's admissible region.
    #[error("{0}")]
    Domain(String),

    /// A closed-form denominator or λ_k was non-positive.
    #[error("degenerate system: {0}")]
    DegenerateSystem(String),

    /// Elimination met a pivot below tolerance.
    #[error("singular system: pivot {pivot:e} at column {column} below tolerance {tolerance:e}")]
    SingularSystem { column: usize, pivot: f64, tolerance: f64 },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by invalid user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::BudgetExceeded(_))
    }
}
