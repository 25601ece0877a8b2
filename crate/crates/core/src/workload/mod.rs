//! Trace ingestion, filtering, block and mempool slicing, and synthetic
//! generators.

mod slice;
mod synth;
mod trace;

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{Limit, ModelError, Params, StateKey, Transaction, Workload, WorkloadKind};

pub use slice::{slice_obs, slice_pbc};
pub use synth::{synth, synth_records, SynthSpec};
pub use trace::{
    export_records, filter_homogeneous, ingest, ingest_reader, write_records, TraceRecord,
    TRANSFER_GAS,
};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: gas_used must be positive")]
    ZeroGas { line: usize },
    #[error("line {line}: transaction reads and writes nothing")]
    NoAccess { line: usize },
    #[error("line {line}: duplicate hash {hash}")]
    DuplicateHash { line: usize, hash: String },
    #[error("{} workloads need a {} limit, got {limit:?}", kind.as_str(), match kind {
        WorkloadKind::Homogeneous => "round",
        WorkloadKind::Heterogeneous => "gas",
    })]
    LimitMismatch { kind: WorkloadKind, limit: Limit },
    #[error("requested {requested} workloads but only {built} fit; short by {missing} {unit}")]
    Shortfall {
        requested: usize,
        built: usize,
        missing: u64,
        unit: &'static str,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Maps key strings to dense [`StateKey`] ids in first-appearance order.
#[derive(Debug, Default, Clone)]
pub struct KeyInterner {
    ids: HashMap<String, StateKey>,
}

impl KeyInterner {
    pub fn intern(&mut self, key: &str) -> StateKey {
        let next = StateKey(self.ids.len() as u64);
        *self.ids.entry(key.to_owned()).or_insert(next)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

pub(crate) fn to_workload(
    records: &[TraceRecord],
    kind: WorkloadKind,
    params: Option<Params>,
    interner: &mut KeyInterner,
) -> Result<Workload, WorkloadError> {
    let mut txs = Vec::with_capacity(records.len());
    for (id, r) in records.iter().enumerate() {
        let reads: Vec<StateKey> = r.reads.iter().map(|k| interner.intern(k)).collect();
        let writes: Vec<StateKey> = r.writes.iter().map(|k| interner.intern(k)).collect();
        txs.push(Transaction::new(id, r.gas_used, r.tip, reads, writes)?);
    }
    Ok(Workload::new(txs, kind, params)?)
}

/// Converts records into one workload with ids `0..n` in record order.
pub fn records_to_workload(
    records: &[TraceRecord],
    kind: WorkloadKind,
) -> Result<Workload, WorkloadError> {
    to_workload(records, kind, None, &mut KeyInterner::default())
}
