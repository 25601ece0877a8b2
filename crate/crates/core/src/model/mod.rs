//! Domain types shared by every scheduler: transactions, workloads, conflict
//! structures and schedules.
//!
//! Time and gas are the same unit: a transaction's execution time is its
//! `gasUsed`, so all arithmetic stays in integers.

mod graph;
mod schedule;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::{ConflictGraph, DependencyDag};
pub use schedule::{makespan, Schedule, Slot};
pub use validate::{replay_work_conserving, validate, Requirement, ScheduleViolation};

/// Position of a transaction in its workload (block order or arrival order).
pub type TxId = usize;

/// Opaque identifier of an account or storage slot.
///
/// Keys are dense ids handed out by a [`KeyInterner`](crate::workload::KeyInterner)
/// or chosen directly by synthetic generators. Two keys are equal iff their ids are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateKey(pub u64);

impl From<u64> for StateKey {
    fn from(raw: u64) -> Self {
        StateKey(raw)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("transaction {id}: execution time must be at least 1")]
    ZeroExecTime { id: TxId },
    #[error("transaction at position {position} has id {id}; ids must be dense and in order")]
    NonDenseIds { position: usize, id: TxId },
    #[error("homogeneous workload has mixed execution times ({first} and {other})")]
    MixedExecTimes { first: u64, other: u64 },
}

/// A pending or ordered transaction with its declared access sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    id: TxId,
    exec_time: u64,
    tip: u64,
    reads: Vec<StateKey>,
    writes: Vec<StateKey>,
}

impl Transaction {
    /// Builds a transaction; access sets are sorted and deduplicated.
    pub fn new(
        id: TxId,
        exec_time: u64,
        tip: u64,
        reads: impl IntoIterator<Item = StateKey>,
        writes: impl IntoIterator<Item = StateKey>,
    ) -> Result<Self, ModelError> {
        if exec_time == 0 {
            return Err(ModelError::ZeroExecTime { id });
        }
        Ok(Transaction {
            id,
            exec_time,
            tip,
            reads: sorted_set(reads),
            writes: sorted_set(writes),
        })
    }

    pub fn id(&self) -> TxId {
        self.id
    }

    /// Execution time in gas units.
    pub fn exec_time(&self) -> u64 {
        self.exec_time
    }

    /// Priority fee per gas unit.
    pub fn tip(&self) -> u64 {
        self.tip
    }

    /// Validator reward: `exec_time * tip`.
    pub fn reward(&self) -> u128 {
        u128::from(self.exec_time) * u128::from(self.tip)
    }

    pub fn reads(&self) -> &[StateKey] {
        &self.reads
    }

    pub fn writes(&self) -> &[StateKey] {
        &self.writes
    }
}

fn sorted_set(keys: impl IntoIterator<Item = StateKey>) -> Vec<StateKey> {
    let mut keys: Vec<StateKey> = keys.into_iter().collect();
    keys.sort_unstable();
    keys.dedup();
    keys
}

/// Sum of rewards of the given transactions.
pub fn total_reward<'a>(txs: impl IntoIterator<Item = &'a Transaction>) -> u128 {
    txs.into_iter().map(Transaction::reward).sum()
}

/// Sum of execution times of the given transactions.
pub fn total_work<'a>(txs: impl IntoIterator<Item = &'a Transaction>) -> u64 {
    txs.into_iter().map(Transaction::exec_time).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadKind {
    Homogeneous,
    Heterogeneous,
}

impl WorkloadKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadKind::Homogeneous => "homogeneous",
            WorkloadKind::Heterogeneous => "heterogeneous",
        }
    }
}

/// Size limit of a block: a round count for homogeneous workloads or a
/// gas/time budget for heterogeneous ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Limit {
    Rounds(u64),
    Gas(u64),
}

impl Limit {
    pub fn value(self) -> u64 {
        match self {
            Limit::Rounds(r) | Limit::Gas(r) => r,
        }
    }

    /// Runtime budget in gas units given the per-transaction time of a
    /// homogeneous workload.
    pub fn budget(self, unit_time: u64) -> u64 {
        match self {
            Limit::Rounds(r) => r.saturating_mul(unit_time),
            Limit::Gas(b) => b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObsParams {
    pub cores: usize,
    pub limit: Option<Limit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PbcParams {
    pub cores: usize,
    pub limit: Limit,
    pub pool_factor: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Params {
    Obs(ObsParams),
    Pbc(PbcParams),
}

/// An ordered transaction sequence plus the problem parameters it was cut for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workload {
    txs: Vec<Transaction>,
    kind: WorkloadKind,
    params: Option<Params>,
}

impl Workload {
    pub fn new(
        txs: Vec<Transaction>,
        kind: WorkloadKind,
        params: Option<Params>,
    ) -> Result<Self, ModelError> {
        for (position, tx) in txs.iter().enumerate() {
            if tx.id != position {
                return Err(ModelError::NonDenseIds { position, id: tx.id });
            }
        }
        if kind == WorkloadKind::Homogeneous {
            if let Some(first) = txs.first() {
                if let Some(other) = txs.iter().find(|t| t.exec_time != first.exec_time) {
                    return Err(ModelError::MixedExecTimes {
                        first: first.exec_time,
                        other: other.exec_time,
                    });
                }
            }
        }
        Ok(Workload { txs, kind, params })
    }

    pub fn txs(&self) -> &[Transaction] {
        &self.txs
    }

    pub fn len(&self) -> usize {
        self.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.txs.is_empty()
    }

    pub fn kind(&self) -> WorkloadKind {
        self.kind
    }

    pub fn params(&self) -> Option<Params> {
        self.params
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = Some(params);
        self
    }

    /// Execution time shared by all transactions of a homogeneous workload.
    pub fn unit_time(&self) -> Option<u64> {
        match self.kind {
            WorkloadKind::Homogeneous => self.txs.first().map(Transaction::exec_time),
            WorkloadKind::Heterogeneous => None,
        }
    }

    pub fn total_work(&self) -> u64 {
        total_work(&self.txs)
    }
}
