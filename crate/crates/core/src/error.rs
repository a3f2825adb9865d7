//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("counterexample requires {requirement}, got n = {n}")]
    BadCounterexampleSize { requirement: &'static str, n: u64 },

    #[error("empty version space: best residual {residual:.6} exceeds beta {beta:.6} (member {member})")]
    EmptyVersionSpace {
        member: usize,
        residual: f64,
        beta: f64,
    },

    #[error("all candidate policies were skipped (empty version spaces)")]
    AllPoliciesSkipped,

    #[error("eluder search budget of {budget} nodes exceeded")]
    EluderBudget { budget: usize },

    #[error("low-rank generator could not satisfy norm constraints after {attempts} attempts")]
    LowRankInfeasible { attempts: usize },

    #[error("invalid config at `{path}`: {message}")]
    InvalidConfig { path: String, message: String },

    #[error("rate fit needs at least 3 positive points, {kept} left after dropping {dropped}")]
    TooFewRatePoints { kept: usize, dropped: usize },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
