//! Schedule validity checking, used by every producer's tests and by the
//! experiment runner before any metric is computed.

use thiserror::Error;

use super::{ConflictGraph, DependencyDag, Schedule, Transaction, TxId};

/// Extra constraints on top of the core/conflict rules.
#[derive(Debug, Clone, Copy)]
pub enum Requirement<'a> {
    /// Ordered-block scheduling: every transaction is scheduled and every DAG
    /// arc `(i, j)` satisfies `start_j >= end_i`.
    Ordered(&'a DependencyDag),
    /// Block construction: the makespan stays within the budget.
    Budget(u64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    #[error("schedule covers {schedule} transactions, workload has {workload}")]
    LengthMismatch { schedule: usize, workload: usize },
    #[error("transaction {id} is not scheduled")]
    Missing { id: TxId },
    #[error("transaction {id} runs on core {core} but only {cores} cores exist")]
    CoreOutOfRange { id: TxId, core: usize, cores: usize },
    #[error("transaction {id} occupies {actual} time units, expected {expected}")]
    DurationMismatch { id: TxId, expected: u64, actual: u64 },
    #[error("transactions {a} and {b} overlap on core {core}")]
    CoreOverlap { a: TxId, b: TxId, core: usize },
    #[error("conflicting transactions {a} and {b} overlap in time")]
    ConflictOverlap { a: TxId, b: TxId },
    #[error("transaction {to} starts before its predecessor {from} finishes")]
    Precedence { from: TxId, to: TxId },
    #[error("makespan {makespan} exceeds budget {budget}")]
    OverBudget { makespan: u64, budget: u64 },
    #[error("core idles at time {time} while transaction {id} is ready")]
    IdleCore { time: u64, id: TxId },
}

/// Checks that no core runs two transactions at once, conflicting
/// transactions never overlap, and the given requirement holds.
pub fn validate(
    txs: &[Transaction],
    schedule: &Schedule,
    conflicts: &ConflictGraph,
    requirement: Requirement<'_>,
) -> Result<(), ScheduleViolation> {
    if schedule.len() != txs.len() {
        return Err(ScheduleViolation::LengthMismatch {
            schedule: schedule.len(),
            workload: txs.len(),
        });
    }
    let cores = schedule.cores();
    let mut per_core: Vec<Vec<(u64, u64, TxId)>> = vec![Vec::new(); cores];
    for (tx, slot) in txs.iter().zip(schedule.slots()) {
        let id = tx.id();
        let Some(slot) = slot else {
            if matches!(requirement, Requirement::Ordered(_)) {
                return Err(ScheduleViolation::Missing { id });
            }
            continue;
        };
        if slot.core >= cores {
            return Err(ScheduleViolation::CoreOutOfRange {
                id,
                core: slot.core,
                cores,
            });
        }
        let actual = slot.end.saturating_sub(slot.start);
        if slot.end < slot.start || actual != tx.exec_time() {
            return Err(ScheduleViolation::DurationMismatch {
                id,
                expected: tx.exec_time(),
                actual,
            });
        }
        per_core[slot.core].push((slot.start, slot.end, id));
    }

    for (core, runs) in per_core.iter_mut().enumerate() {
        runs.sort_unstable();
        for pair in runs.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(ScheduleViolation::CoreOverlap {
                    a: pair[0].2,
                    b: pair[1].2,
                    core,
                });
            }
        }
    }

    for (a, b) in conflicts.edges() {
        if let (Some(sa), Some(sb)) = (schedule.slot(a), schedule.slot(b)) {
            if sa.overlaps(&sb) {
                return Err(ScheduleViolation::ConflictOverlap { a, b });
            }
        }
    }

    match requirement {
        Requirement::Ordered(dag) => {
            for (from, to) in dag.edges() {
                let (Some(sf), Some(st)) = (schedule.slot(from), schedule.slot(to)) else {
                    unreachable!("ordered schedules place every transaction");
                };
                if st.start < sf.end {
                    return Err(ScheduleViolation::Precedence { from, to });
                }
            }
        }
        Requirement::Budget(budget) => {
            let makespan = schedule.makespan();
            if makespan > budget {
                return Err(ScheduleViolation::OverBudget { makespan, budget });
            }
        }
    }
    Ok(())
}

/// Replays an ordered schedule and reports the first instant at which a core
/// is free while some unstarted transaction already has all predecessors
/// finished. List schedulers never produce such an instant.
pub fn replay_work_conserving(
    txs: &[Transaction],
    schedule: &Schedule,
    dag: &DependencyDag,
) -> Result<(), ScheduleViolation> {
    let slots: Vec<_> = txs
        .iter()
        .map(|tx| {
            schedule
                .slot(tx.id())
                .ok_or(ScheduleViolation::Missing { id: tx.id() })
        })
        .collect::<Result<_, _>>()?;
    let mut events: Vec<u64> = std::iter::once(0)
        .chain(slots.iter().map(|s| s.end))
        .collect();
    events.sort_unstable();
    events.dedup();
    for &time in &events {
        let busy = slots
            .iter()
            .filter(|s| s.start <= time && time < s.end)
            .count();
        if busy >= schedule.cores() {
            continue;
        }
        let waiting = (0..txs.len()).find(|&id| {
            slots[id].start > time && dag.predecessors(id).iter().all(|&p| slots[p].end <= time)
        });
        if let Some(id) = waiting {
            return Err(ScheduleViolation::IdleCore { time, id });
        }
    }
    Ok(())
}
