//! Crate-wide error type. Variants are grouped by the stage that raises
//! them; [`Error::category`] drives the CLI exit codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Malformed input data, schemas, or option combinations.
    Input,
    /// Numerical failure (rank deficiency, separation, non-convergence, ...).
    Numerical,
    /// Too many degenerate replicates to report a bootstrap variance.
    DegenerateReplicates,
}

#[derive(Debug, Error)]
pub enum Error {
    // ---- input / frame construction ----
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("non-numeric value in column `{column}` at row {row}")]
    NonNumericField { column: String, row: usize },
    #[error("non-positive weight at row {0}")]
    NonPositiveWeight(usize),
    #[error("non-finite value in column `{column}` at row {row}")]
    NonFiniteField { column: String, row: usize },
    #[error("outcome outside {{0,1}} at row {0}")]
    InvalidOutcome(usize),
    #[error("ragged row at row {0}: covariate fields missing")]
    RaggedRow(usize),
    #[error("frame has no units")]
    EmptyFrame,
    #[error("unknown covariate `{0}`")]
    UnknownCovariate(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    // ---- replication design ----
    #[error("strata with a single PSU cannot be replicated: {}", .0.join(", "))]
    SingletonPsuStrata(Vec<String>),
    #[error("replicate count {0} is too small; at least 2 replicates are required")]
    ReplicateCountTooSmall(usize),
    #[error("frame has {0} units; unit resampling needs at least 2")]
    FrameTooSmallForResampling(usize),

    // ---- model fitting ----
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("outcome is constant: both outcome classes are required")]
    ConstantOutcome,
    #[error("design matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error(
        "quasi-complete separation: |beta[{index}]| = {value:.3} exceeded the divergence bound"
    )]
    Separation { index: usize, value: f64 },
    #[error(
        "IRLS did not converge in {iterations} iterations (max |score| = {max_abs_score:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        max_abs_score: f64,
        last_beta: Vec<f64>,
    },

    // ---- AUC / inference ----
    #[error("degenerate AUC: no positive-weight {class} units")]
    DegenerateAuc { class: &'static str },
    #[error("replicate {0} has a degenerate AUC; jackknife variance needs all replicates")]
    MissingReplicate(usize),
    #[error("only {usable} usable replicates; at least 2 are required")]
    TooFewUsableReplicates { usable: usize },
    #[error("{degenerate} of {total} replicates are degenerate (more than 1%)")]
    TooManyDegenerateReplicates { degenerate: usize, total: usize },
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("variance must be non-negative, got {0}")]
    NegativeVariance(f64),
    #[error("percentile intervals require a bootstrap replicate scheme, not {0}")]
    PercentileRequiresBootstrap(crate::replicate::Method),
    #[error("replicate scheme mismatch: expected {expected}, got {actual}")]
    SchemeMismatch {
        expected: crate::replicate::Method,
        actual: crate::replicate::Method,
    },
    #[error("method mismatch between estimates: {left} vs {right}")]
    MethodMismatch {
        left: crate::replicate::Method,
        right: crate::replicate::Method,
    },
    #[error("test statistic is unbounded: difference {d_hat:.6e} with zero variance")]
    InfiniteZ { d_hat: f64 },
    #[error("probability argument must lie strictly between 0 and 1, got {0}")]
    InvalidProbability(f64),

    // ---- simulation ----
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("sampling scheme exceeds the population: {0}")]
    SchemeExceedsPopulation(String),
    #[error("scenario {0} is not in the registry")]
    ScenarioNotFound(u32),
    #[error("scenario registry: {0}")]
    Registry(String),
    #[error("{failed} of {total} Monte Carlo runs failed (more than 2%)")]
    TooManyRunFailures { failed: usize, total: usize },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            MissingColumn(_) | NonNumericField { .. } | NonPositiveWeight(_)
            | NonFiniteField { .. } | InvalidOutcome(_) | RaggedRow(_) | EmptyFrame
            | UnknownCovariate(_) | Csv(_) | Io(_) | SingletonPsuStrata(_)
            | ReplicateCountTooSmall(_) | FrameTooSmallForResampling(_)
            | DimensionMismatch { .. } | ConstantOutcome | InvalidAlpha(_)
            | PercentileRequiresBootstrap(_) | SchemeMismatch { .. } | MethodMismatch { .. }
            | InvalidProbability(_) | InvalidSpec(_) | SchemeExceedsPopulation(_)
            | ScenarioNotFound(_) | Registry(_) => ErrorCategory::Input,
            RankDeficient { .. } | Separation { .. } | NonConvergence { .. }
            | DegenerateAuc { .. } | NegativeVariance(_) | InfiniteZ { .. }
            | NotPositiveDefinite => ErrorCategory::Numerical,
            MissingReplicate(_) | TooFewUsableReplicates { .. }
            | TooManyDegenerateReplicates { .. } | TooManyRunFailures { .. } => {
                ErrorCategory::DegenerateReplicates
            }
        }
    }
}
