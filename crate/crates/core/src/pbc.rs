//! Parallel-block construction: value-density scoring, the budget-bounded
//! selection scheduler (GH) and the reward-greedy baseline (RG).
//!
//! Both schedulers share one dispatch loop and differ only in the priority
//! key. A popped transaction that conflicts with a running one is deferred
//! until a conflicting runner completes; a popped transaction that no longer
//! fits in the budget is dropped for good.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use crate::conflict::build_conflict_graph;
use crate::model::{ConflictGraph, Schedule, Transaction, TxId, Workload};

/// Block-construction priority. Ordering is
/// `(-reward/exec_time, degree, -reward, id)`; density is compared exactly by
/// cross-multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PbcPriority {
    pub reward: u128,
    pub exec_time: u64,
    pub degree: usize,
    pub id: TxId,
}

impl PbcPriority {
    /// Value density as a float, for display only.
    pub fn density(&self) -> f64 {
        self.reward as f64 / self.exec_time as f64
    }

    fn cmp_density(&self, other: &Self) -> Ordering {
        // Cross products overflow u128 only for extreme values; those take the
        // exact continued-fraction route.
        match (
            self.reward.checked_mul(u128::from(other.exec_time)),
            other.reward.checked_mul(u128::from(self.exec_time)),
        ) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => wide_ratio_cmp(self.reward, self.exec_time, other.reward, other.exec_time),
        }
    }
}

/// Compares `a / x` with `b / y` exactly via continued-fraction steps.
fn wide_ratio_cmp(mut a: u128, mut x: u64, mut b: u128, mut y: u64) -> Ordering {
    let mut flipped = false;
    loop {
        let (qa, qb) = (a / u128::from(x), b / u128::from(y));
        if qa != qb {
            let ord = qa.cmp(&qb);
            return if flipped { ord.reverse() } else { ord };
        }
        let (ra, rb) = (a % u128::from(x), b % u128::from(y));
        match (ra == 0, rb == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return if flipped { Ordering::Greater } else { Ordering::Less },
            (false, true) => return if flipped { Ordering::Less } else { Ordering::Greater },
            (false, false) => {
                // cmp(ra/x, rb/y) == reverse(cmp(x/ra, y/rb)); remainders fit in u64.
                (a, x, b, y) = (u128::from(x), ra as u64, u128::from(y), rb as u64);
                flipped = !flipped;
            }
        }
    }
}

impl Ord for PbcPriority {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cmp_density(self)
            .then_with(|| self.degree.cmp(&other.degree))
            .then_with(|| other.reward.cmp(&self.reward))
            .then_with(|| self.id.cmp(&other.id))
    }
}

impl PartialOrd for PbcPriority {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reward-greedy key `(-reward, id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RewardPriority {
    pub neg_reward: Reverse<u128>,
    pub id: TxId,
}

pub fn score(graph: &ConflictGraph, txs: &[Transaction]) -> Vec<PbcPriority> {
    assert_eq!(graph.node_count(), txs.len(), "graph does not match the pool");
    txs.iter()
        .map(|tx| PbcPriority {
            reward: tx.reward(),
            exec_time: tx.exec_time(),
            degree: graph.degree(tx.id()),
            id: tx.id(),
        })
        .collect()
}

/// Outcome of block construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Selection {
    pub selected: Vec<TxId>,
    pub schedule: Schedule,
}

impl Selection {
    pub fn reward(&self, txs: &[Transaction]) -> u128 {
        self.selected.iter().map(|&id| txs[id].reward()).sum()
    }

    /// Sequential execution time of the selected transactions.
    pub fn work(&self, txs: &[Transaction]) -> u64 {
        self.selected.iter().map(|&id| txs[id].exec_time()).sum()
    }
}

/// Density-first block construction within `budget` on `p` cores.
pub fn schedule_pbc(
    txs: &[Transaction],
    p: usize,
    budget: u64,
    priorities: &[PbcPriority],
    conflicts: &ConflictGraph,
) -> Selection {
    dispatch(txs, p, budget, priorities, conflicts)
}

/// Reward-greedy baseline: same dispatch rule, candidates by reward then arrival.
pub fn schedule_rg(
    txs: &[Transaction],
    p: usize,
    budget: u64,
    conflicts: &ConflictGraph,
) -> Selection {
    let keys: Vec<RewardPriority> = txs
        .iter()
        .map(|tx| RewardPriority {
            neg_reward: Reverse(tx.reward()),
            id: tx.id(),
        })
        .collect();
    dispatch(txs, p, budget, &keys, conflicts)
}

trait Keyed: Ord + Copy {
    fn id(&self) -> TxId;
}

impl Keyed for PbcPriority {
    fn id(&self) -> TxId {
        self.id
    }
}

impl Keyed for RewardPriority {
    fn id(&self) -> TxId {
        self.id
    }
}

fn dispatch<K: Keyed>(
    txs: &[Transaction],
    p: usize,
    budget: u64,
    keys: &[K],
    conflicts: &ConflictGraph,
) -> Selection {
    assert!(p >= 1, "at least one core is required");
    let n = txs.len();
    let mut schedule = Schedule::new(p, n);
    let mut selected = Vec::new();
    let mut free: BTreeSet<usize> = (0..p).collect();
    let mut running: BinaryHeap<Reverse<(u64, usize, TxId)>> = BinaryHeap::new();
    // Candidates in ready \ deferred.
    let mut available: BinaryHeap<Reverse<K>> = keys.iter().map(|&k| Reverse(k)).collect();
    let mut deferred = vec![false; n];
    let mut running_conflicts = vec![0usize; n];
    let mut now = 0u64;

    loop {
        while !free.is_empty() {
            let Some(Reverse(key)) = available.pop() else { break };
            let id = key.id();
            if running_conflicts[id] > 0 {
                deferred[id] = true;
                continue;
            }
            let tx = &txs[id];
            if now + tx.exec_time() > budget {
                continue;
            }
            let core = free.pop_first().expect("free core");
            schedule.place(id, core, now, tx.exec_time());
            selected.push(id);
            running.push(Reverse((now + tx.exec_time(), core, id)));
            for &other in conflicts.neighbors(id) {
                running_conflicts[other] += 1;
            }
        }

        let Some(&Reverse((next, _, _))) = running.peek() else { break };
        now = next;
        while let Some(&Reverse((end, core, id))) = running.peek() {
            if end != now {
                break;
            }
            running.pop();
            free.insert(core);
            for &other in conflicts.neighbors(id) {
                running_conflicts[other] -= 1;
                if deferred[other] {
                    deferred[other] = false;
                    available.push(Reverse(keys[other]));
                }
            }
        }
    }

    selected.sort_unstable();
    Selection { selected, schedule }
}

/// Full GH pipeline for a pool: conflict graph, scores, dispatch.
pub fn run_pbc(pool: &Workload, p: usize, budget: u64) -> Selection {
    let txs = pool.txs();
    let graph = build_conflict_graph(txs);
    let priorities = score(&graph, txs);
    schedule_pbc(txs, p, budget, &priorities, &graph)
}
