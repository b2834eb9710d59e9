use std::fmt;

use thiserror::Error;

/// A single failed rate-matrix axiom, with the worst offending location.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `K[i][j] < 0` for some `i != j`.
    NegativeOffDiagonal { i: usize, j: usize, value: f64 },
    /// Column `j` does not sum to zero within tolerance.
    ColumnSumViolation { j: usize, residual: f64, allowed: f64 },
    /// `K[i][j]·π[j]` and `K[j][i]·π[i]` disagree beyond the relative tolerance.
    DetailedBalanceViolation { i: usize, j: usize, relative_mismatch: f64 },
    /// `π[i] <= 0` or not finite.
    NonPositivePi { i: usize, value: f64 },
    /// `Σ π` is not one.
    PiNotNormalized { sum: f64 },
    /// Non-finite matrix entry.
    NonFinite { i: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeOffDiagonal { i, j, value } => {
                write!(f, "negative off-diagonal K[{i}][{j}] = {value:e}")
            }
            Violation::ColumnSumViolation { j, residual, allowed } => {
                write!(f, "column {j} sums to {residual:e} (allowed {allowed:e})")
            }
            Violation::DetailedBalanceViolation { i, j, relative_mismatch } => write!(
                f,
                "detailed balance fails for pair ({i}, {j}), relative mismatch {relative_mismatch:e}"
            ),
            Violation::NonPositivePi { i, value } => write!(f, "pi[{i}] = {value:e} is not positive"),
            Violation::PiNotNormalized { sum } => write!(f, "pi sums to {sum:e}, not 1"),
            Violation::NonFinite { i, j } => write!(f, "K[{i}][{j}] is not finite"),
        }
    }
}

/// Every violated axiom found by [`crate::validate`], one entry per axiom kind.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("rate matrix axioms violated: {0}")]
    Validation(ValidationReport),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("supporting graph is disconnected into {} components", .components.len())]
    DisconnectedGraph { components: Vec<Vec<usize>> },
    #[error("no detailed-balance distribution exists: cycle through ({i}, {j}) mismatches by {mismatch:e}")]
    BalanceInconsistent { i: usize, j: usize, mismatch: f64 },
    #[error("pivot breakdown at state {state}: |D_jj| = {value:e}")]
    PivotBreakdown { state: usize, value: f64 },
    #[error("rank-one update of the M factor lost positive definiteness at step {step}")]
    UpdateBreakdown { step: usize },
    #[error("Lanczos iteration did not converge in {iterations} steps")]
    NoConvergence { iterations: usize },
    #[error("type B application requested but no M factor is maintained")]
    TypeBWithoutMFactor,
    #[error("reference time is infinite: the reduced system is fully relaxed")]
    InfiniteTime,
    #[error("dense routine requested for n = {n}, above the limit {limit}")]
    DenseLimitExceeded { n: usize, limit: usize },
    #[error("zero pivot in the original-form contraction at state {state}")]
    ZeroPivot { state: usize },
    #[error("{digits} decimal digits requested; at most {max} are available")]
    PrecisionUnavailable { digits: u32, max: u32 },
    #[error("no states survive truncation")]
    EmptyAfterTruncation,
    #[error("stationary weight of state {state} underflows double precision")]
    StationaryUnderflow { state: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
