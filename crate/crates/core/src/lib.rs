//! Conflict-aware parallel scheduling of blockchain transactions.
//!
//! Two validator-side problems are covered:
//!
//! * **Ordered-block scheduling** ([`obs`]): run a fixed, totally ordered block
//!   on `p` cores with minimum makespan while staying equivalent to sequential
//!   execution in block order.
//! * **Parallel-block construction** ([`pbc`]): pick transactions from a
//!   mempool and schedule them on `p` cores within a runtime budget so that
//!   validator reward is maximal.
//!
//! [`exact`] holds small-instance exact solvers, a brute-force oracle, a
//! reward upper bound and CPLEX-LP export of the four integer programs.
//! [`workload`] ingests traces and slices them into blocks and pools, and
//! [`experiment`] runs parameter grids and renders result tables.

pub mod conflict;
pub mod exact;
pub mod experiment;
pub mod model;
pub mod obs;
pub mod pbc;
pub mod workload;

pub use conflict::{build_conflict_graph, build_dag, conflicts};
pub use model::{
    makespan, validate, ConflictGraph, DependencyDag, Limit, Params, Requirement, Schedule, Slot,
    StateKey, Transaction, TxId, Workload, WorkloadKind,
};
pub use obs::{preprocess, run_obs, schedule_obs, schedule_sol};
pub use pbc::{run_pbc, schedule_pbc, schedule_rg, score, Selection};
pub use workload::{ingest, slice_obs, slice_pbc, synth, SynthSpec, TraceRecord};
pub use experiment::{run_experiment, ExperimentConfig, ResultTable};
