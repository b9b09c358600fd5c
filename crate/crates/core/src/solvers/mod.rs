//! In-repo convex solvers.
//!
//! [`lp_solve`] is a dense revised simplex method for the LP-representable
//! programs; [`split_solve`] is an ADMM scheme for ℓ1 objectives with an
//! ℓ2-ball and box constraints on a linearly mapped vector.

mod lp;
mod split;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use lp::{lp_solve, lp_solve_with, FarkasCertificate, LpOptions, LpProblem};
pub use split::{split_solve, MappedConstraints, SplitProblem, SplitSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIters,
    Infeasible,
    Unbounded,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    /// Largest constraint violation of `solution` (ℓ∞).
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub runtime_ms: u64,
    /// Present when `status` is `Infeasible` and the LP engine produced one.
    pub farkas: Option<FarkasCertificate>,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
