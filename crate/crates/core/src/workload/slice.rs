//! Cutting a record stream into consecutive, non-overlapping blocks or pools.

use crate::model::{Limit, ObsParams, Params, PbcParams, Workload, WorkloadKind};

use super::trace::TraceRecord;
use super::{to_workload, KeyInterner, WorkloadError};

/// How many records the next workload takes.
enum Cut {
    Count(usize),
    Gas(u64),
}

/// Block size from the limit: rounds are scaled by `slots` (transactions per
/// round times pool factor), gas by `gas_scale`.
fn cut_rule(kind: WorkloadKind, limit: Limit, slots: u64, gas_scale: u64) -> Result<Cut, WorkloadError> {
    match (kind, limit) {
        (WorkloadKind::Homogeneous, Limit::Rounds(r)) => {
            Ok(Cut::Count(r.saturating_mul(slots) as usize))
        }
        (WorkloadKind::Heterogeneous, Limit::Gas(b)) => Ok(Cut::Gas(b.saturating_mul(gas_scale))),
        _ => Err(WorkloadError::LimitMismatch { kind, limit }),
    }
}

fn slice(
    records: &[TraceRecord],
    kind: WorkloadKind,
    cut: Cut,
    count: usize,
    params: Params,
) -> Result<Vec<Workload>, WorkloadError> {
    let mut interner = KeyInterner::default();
    let mut out = Vec::with_capacity(count);
    let mut pos = 0;
    match cut {
        Cut::Count(size) => {
            let needed = size.saturating_mul(count);
            if records.len() < needed {
                return Err(WorkloadError::Shortfall {
                    requested: count,
                    built: records.len() / size.max(1),
                    missing: (needed - records.len()) as u64,
                    unit: "records",
                });
            }
            for _ in 0..count {
                let chunk = &records[pos..pos + size];
                out.push(to_workload(chunk, kind, Some(params), &mut interner)?);
                pos += size;
            }
        }
        Cut::Gas(cap) => {
            while out.len() < count {
                // Records that could never fit are skipped rather than stalling.
                while pos < records.len() && records[pos].gas_used > cap {
                    pos += 1;
                }
                let start = pos;
                let mut used = 0u64;
                while pos < records.len() && used + records[pos].gas_used <= cap {
                    used += records[pos].gas_used;
                    pos += 1;
                }
                if pos == records.len() && (used < cap || start == pos) {
                    return Err(WorkloadError::Shortfall {
                        requested: count,
                        built: out.len(),
                        missing: cap - used,
                        unit: "gas (at least)",
                    });
                }
                out.push(to_workload(&records[start..pos], kind, Some(params), &mut interner)?);
            }
        }
    }
    Ok(out)
}

/// `count` ordered blocks: `R * p` transactions each for homogeneous records,
/// the longest prefix with total gas at most `B` for heterogeneous ones.
pub fn slice_obs(
    records: &[TraceRecord],
    kind: WorkloadKind,
    p: usize,
    limit: Limit,
    count: usize,
) -> Result<Vec<Workload>, WorkloadError> {
    let cut = cut_rule(kind, limit, p as u64, 1)?;
    let params = Params::Obs(ObsParams {
        cores: p,
        limit: Some(limit),
    });
    slice(records, kind, cut, count, params)
}

/// `count` mempool pools about `x` times one block: `R * p * x` transactions
/// (homogeneous) or the longest prefix with gas at most `p * B * x`.
pub fn slice_pbc(
    records: &[TraceRecord],
    kind: WorkloadKind,
    p: usize,
    limit: Limit,
    x: u64,
    count: usize,
) -> Result<Vec<Workload>, WorkloadError> {
    let scale = (p as u64).saturating_mul(x);
    let cut = cut_rule(kind, limit, scale, scale)?;
    let params = Params::Pbc(PbcParams {
        cores: p,
        limit,
        pool_factor: x,
    });
    slice(records, kind, cut, count, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(i: usize, gas: u64) -> TraceRecord {
        TraceRecord {
            hash: format!("0x{i:x}"),
            gas_used: gas,
            tip: 1,
            reads: vec![],
            writes: vec![format!("0x{i:x}")],
        }
    }

    fn hom(n: usize) -> Vec<TraceRecord> {
        (0..n).map(|i| rec(i, 21_000)).collect()
    }

    #[test]
    fn homogeneous_blocks() {
        let blocks = slice_obs(&hom(40), WorkloadKind::Homogeneous, 2, Limit::Rounds(10), 2).unwrap();
        assert_eq!(blocks.len(), 2);
        assert!(blocks.iter().all(|b| b.len() == 20));
        let exact = slice_obs(&hom(50), WorkloadKind::Homogeneous, 1, Limit::Rounds(10), 5).unwrap();
        assert_eq!(exact.len(), 5);
    }

    #[test]
    fn heterogeneous_prefix_never_exceeds_budget() {
        let records = vec![rec(0, 100), rec(1, 100), rec(2, 100)];
        let blocks = slice_obs(&records, WorkloadKind::Heterogeneous, 2, Limit::Gas(250), 1).unwrap();
        assert_eq!(blocks[0].len(), 2);
        assert_eq!(blocks[0].total_work(), 200);
    }

    #[test]
    fn pool_sizes() {
        let pools = slice_pbc(&hom(80), WorkloadKind::Homogeneous, 2, Limit::Rounds(10), 2, 2).unwrap();
        assert!(pools.iter().all(|p| p.len() == 40));

        let records: Vec<_> = (0..50).map(|i| rec(i, 300)).collect();
        let pools = slice_pbc(&records, WorkloadKind::Heterogeneous, 2, Limit::Gas(1000), 2, 1).unwrap();
        assert_eq!(pools[0].total_work(), 3900);
    }

    #[test]
    fn shortfall_is_reported() {
        let err = slice_obs(&hom(39), WorkloadKind::Homogeneous, 2, Limit::Rounds(10), 2).unwrap_err();
        assert!(matches!(
            err,
            WorkloadError::Shortfall { requested: 2, built: 1, missing: 1, .. }
        ));
        let err = slice_obs(&[rec(0, 10)], WorkloadKind::Heterogeneous, 1, Limit::Gas(100), 1).unwrap_err();
        assert!(err.to_string().contains("90"), "{err}");
    }

    #[test]
    fn limit_kind_must_match() {
        assert!(matches!(
            slice_obs(&hom(4), WorkloadKind::Homogeneous, 2, Limit::Gas(5), 1),
            Err(WorkloadError::LimitMismatch { .. })
        ));
    }

    #[test]
    fn oversized_records_are_skipped() {
        let records = vec![rec(0, 500), rec(1, 50), rec(2, 60), rec(3, 70)];
        let blocks = slice_obs(&records, WorkloadKind::Heterogeneous, 1, Limit::Gas(100), 1).unwrap();
        assert_eq!(blocks[0].len(), 1);
        assert_eq!(blocks[0].total_work(), 50);
    }

    #[test]
    fn slices_are_consecutive() {
        let blocks = slice_obs(&hom(12), WorkloadKind::Homogeneous, 2, Limit::Rounds(2), 3).unwrap();
        // every key is private, so interned ids reveal the record position
        let firsts: Vec<u64> = blocks.iter().map(|b| b.txs()[0].writes()[0].0).collect();
        assert_eq!(firsts, vec![0, 4, 8]);
    }
}
