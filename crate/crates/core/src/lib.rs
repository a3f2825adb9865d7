//! loss-lab: a tabular testbed for how the regression loss function (squared
//! vs binary cross-entropy vs maximum likelihood) shapes the convergence of
//! value-based decision making — worst-case, small-cost (first-order) or
//! small-variance (second-order) — across cost-sensitive classification and
//! online, offline and hybrid reinforcement learning.
//!
//! Everything runs on exactly solvable instances: finite contexts and
//! actions, cost distributions on a shared grid over [0,1], and finite
//! hypothesis classes, so regret and all diagnostic quantities are computed
//! by exact dynamic programming rather than estimated.

pub mod classes;
pub mod csc;
pub mod error;
pub mod grid;
pub mod hybrid;
pub mod losses;
pub mod mdp;
pub mod offline;
pub mod online;
pub mod rng;

pub use error::{Error, Result};
pub use grid::GridDist;
pub use losses::LossKind;
