//! Constrained mixing of synthesized candidates.

mod craft;
mod kelley;
mod lp;

pub use craft::{
    craft, craft_vectors, ConstraintFamily, ConstraintKind, CraftSolution, CraftStatus, G2Policy, G1_SUCCESS, G2_REL,
    SUPPORT_TOL,
};
pub use kelley::{uncrafted_mix, uncrafted_vectors, GAP_TOL, MAX_CUTS};
pub use lp::{solve_lp, LpError, LpProblem, LpSolution, LpStatus};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CraftError {
    #[error("need at least 2 candidates, got {got}")]
    TooFewCandidates { got: usize },
    #[error("family 'none' has no constraints; use uncrafted_mix")]
    UnconstrainedFamily,
    #[error("g1 ladder must be positive and strictly increasing")]
    BadLadder,
    #[error("cutting-plane master problem failed: {0}")]
    MasterFailed(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}
