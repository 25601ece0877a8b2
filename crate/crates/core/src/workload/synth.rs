//! Seeded synthetic workloads for tests and experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Workload, WorkloadKind};

use super::trace::TraceRecord;
use super::{to_workload, KeyInterner};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthSpec {
    /// `n` transactions of time `t`, each writing a private key.
    ConflictFree { n: usize, t: u64 },
    /// Private writes plus, with probability `hot_percent`%, a write to one
    /// shared key.
    SingleHotKey { n: usize, t: u64, hot_percent: u8 },
    /// Unit transactions where `i` writes keys `i` and `i + 1`.
    Chain { n: usize },
    /// `budget` writers of one key followed by `cores * budget` readers of it,
    /// all with time and reward 1.
    Stress { cores: usize, budget: u64 },
    /// Each transaction touches up to `access_size` keys drawn from
    /// `key_universe`, each read or written with equal odds.
    Random {
        n: usize,
        key_universe: u64,
        access_size: usize,
        gas_min: u64,
        gas_max: u64,
        tip_min: u64,
        tip_max: u64,
    },
}

fn key(i: u64) -> String {
    format!("0x{i:x}")
}

fn record(i: usize, gas: u64, tip: u64, reads: Vec<String>, writes: Vec<String>) -> TraceRecord {
    TraceRecord {
        hash: format!("0x{i:064x}"),
        gas_used: gas,
        tip,
        reads,
        writes,
    }
}

/// Records for `spec`; a deterministic function of `(spec, seed)`.
pub fn synth_records(spec: &SynthSpec, seed: u64) -> Vec<TraceRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *spec {
        SynthSpec::ConflictFree { n, t } => (0..n)
            .map(|i| record(i, t, 1, vec![], vec![key(i as u64 + 1)]))
            .collect(),
        SynthSpec::SingleHotKey { n, t, hot_percent } => {
            let odds = f64::from(hot_percent.min(100)) / 100.0;
            (0..n)
                .map(|i| {
                    let mut writes = vec![key(i as u64 + 1)];
                    if rng.random_bool(odds) {
                        writes.push(key(0));
                    }
                    record(i, t, 1, vec![], writes)
                })
                .collect()
        }
        SynthSpec::Chain { n } => (0..n)
            .map(|i| record(i, 1, 1, vec![], vec![key(i as u64), key(i as u64 + 1)]))
            .collect(),
        SynthSpec::Stress { cores, budget } => {
            let writers = budget as usize;
            let readers = cores * budget as usize;
            (0..writers + readers)
                .map(|i| {
                    if i < writers {
                        record(i, 1, 1, vec![], vec![key(0)])
                    } else {
                        record(i, 1, 1, vec![key(0)], vec![])
                    }
                })
                .collect()
        }
        SynthSpec::Random {
            n,
            key_universe,
            access_size,
            gas_min,
            gas_max,
            tip_min,
            tip_max,
        } => {
            let universe = key_universe.max(1);
            let gas_min = gas_min.max(1);
            (0..n)
                .map(|i| {
                    let gas = rng.random_range(gas_min..=gas_max.max(gas_min));
                    let tip = rng.random_range(tip_min..=tip_max.max(tip_min));
                    let touched = rng.random_range(1..=access_size.max(1));
                    let (mut reads, mut writes) = (Vec::new(), Vec::new());
                    for _ in 0..touched {
                        let k = key(rng.random_range(0..universe));
                        if rng.random_bool(0.5) {
                            writes.push(k);
                        } else {
                            reads.push(k);
                        }
                    }
                    record(i, gas, tip, reads, writes)
                })
                .collect()
        }
    }
}

/// Workload for `spec`: homogeneous when every transaction has the same
/// execution time, heterogeneous otherwise.
pub fn synth(spec: &SynthSpec, seed: u64) -> Workload {
    let records = synth_records(spec, seed);
    let uniform = records.windows(2).all(|w| w[0].gas_used == w[1].gas_used);
    let kind = if uniform {
        WorkloadKind::Homogeneous
    } else {
        WorkloadKind::Heterogeneous
    };
    to_workload(&records, kind, None, &mut KeyInterner::default())
        .expect("generated records are well formed")
}
