use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown bump profile `{0}`")]
    UnknownBump(String),

    #[error("quadrature did not converge: {what} (last change {change:e}, tolerance {tol:e})")]
    Quadrature { what: &'static str, change: f64, tol: f64 },

    #[error("no admissible A below ceiling {ceiling}; worst offender at xi = {worst_xi} (ratio {worst_ratio})")]
    ACeiling { ceiling: f64, worst_xi: f64, worst_ratio: f64 },

    #[error("tail of the A-condition sum is {tail:e}, above the 1e-12 budget; increase j_max")]
    ATail { tail: f64 },

    #[error("N = {0} is not a perfect square")]
    NotPerfectSquare(u64),

    #[error("N = {0} is below the minimum of 16")]
    NTooSmall(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sampling needs {count} points at dx = {dx:e}, above the budget of {budget}")]
    MemoryBudget { dx: f64, count: usize, budget: usize },

    #[error("grid does not resolve the phase at k = {k}: phase step {phase_step:.4} rad exceeds {limit}")]
    UnresolvedPhase { k: f64, phase_step: f64, limit: f64 },

    #[error("signals do not share one grid")]
    MismatchedGrids,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("conservation drift {drift:e} at k = {k} exceeds {limit:e}")]
    ConservationDrift { k: f64, drift: f64, limit: f64 },

    #[error("spectrum grid is not uniform")]
    NonUniformGrid,

    #[error("L1 norm {norm} is outside the contraction regime (<= {limit})")]
    NormRegime { norm: f64, limit: f64 },

    #[error("k-window tail fraction {fraction:e} exceeds budget {budget:e}")]
    TailBudget { fraction: f64, budget: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotPerfectSquare(_)
            | Error::NTooSmall(_)
            | Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::UnknownBump(_) => 2,
            _ => 1,
        }
    }
}
