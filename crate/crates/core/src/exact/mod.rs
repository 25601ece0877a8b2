//! Exact baselines: integer-program builders for both problems, an embedded
//! branch-and-bound solver for desk-scale instances, an exhaustive oracle, a
//! reward upper bound and CPLEX-LP export for external solvers.

mod bound;
mod brute;
mod build;
mod lp;
mod model;
mod solve;

use thiserror::Error;

pub use bound::upper_bound;
pub use brute::{brute_force, max_weight, min_makespan, BRUTE_FORCE_MAX_N};
pub use build::{build_obs_het, build_obs_hom, build_pbc_het, build_pbc_hom, default_big_m};
pub use lp::{export_lp, parse_lp, to_lp_string};
pub use model::{
    Constraint, ExactModel, Formulation, Instance, LinExpr, ModelMeta, ModelShape, Relation,
    Sense, VarId, VarKind, Variable,
};
pub use solve::{solve_exact, ExactSolution, SolveOptions, SolveStatus};

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("instance has {n} transactions; enumeration is limited to {max}")]
    TooLarge { n: usize, max: usize },
    #[error("model carries no instance (was it parsed from a file?)")]
    NoInstance,
    #[error("at least one core is required")]
    NoCores,
    #[error("big constant {big_m} is below the total execution time {needed}")]
    BigMTooSmall { big_m: u64, needed: u64 },
    #[error("reward {0} does not fit a 128-bit signed coefficient")]
    WeightOverflow(u128),
    #[error("LP parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("solver produced an invalid assignment: {0}")]
    Internal(String),
}
