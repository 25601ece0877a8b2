//! Ordered-block scheduling: critical-path priorities, the event-driven list
//! scheduler (GH), and the in-order declared-access baseline (Sol).
//!
//! Both schedulers simulate execution on `p` cores. Time advances only to the
//! next completion instant; all transactions finishing at that instant are
//! retired together before dispatching resumes. A freed transaction always
//! goes to the lowest-numbered free core.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::conflict::build_dag;
use crate::model::{ConflictGraph, DependencyDag, Schedule, Transaction, TxId, Workload};

/// Structural priority of a transaction in the dependency DAG.
///
/// Ordering is `(-height, -volume, -fanout, id)`: the *smallest* value is the
/// most urgent transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ObsPriority {
    /// Longest execution-time path starting at (and including) this transaction.
    pub height: u64,
    /// Execution-time mass of this transaction and its descendants.
    pub volume: u128,
    pub fanout: usize,
    pub id: TxId,
}

impl Ord for ObsPriority {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .height
            .cmp(&self.height)
            .then_with(|| other.volume.cmp(&self.volume))
            .then_with(|| other.fanout.cmp(&self.fanout))
            .then_with(|| self.id.cmp(&other.id))
    }
}

impl PartialOrd for ObsPriority {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// How descendant volume is accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VolumeRule {
    /// `volume = t + sum(volume of successors)`. Descendants reachable along
    /// several paths are counted once per path; saturates at `u128::MAX`.
    #[default]
    Recursive,
    /// `volume = t + sum(t of every distinct descendant)`.
    Descendants,
}

/// Computes per-transaction priorities in one reverse-topological sweep
/// starting from the sinks.
pub fn preprocess(dag: &DependencyDag, txs: &[Transaction]) -> Vec<ObsPriority> {
    preprocess_with(dag, txs, VolumeRule::Recursive)
}

pub fn preprocess_with(
    dag: &DependencyDag,
    txs: &[Transaction],
    rule: VolumeRule,
) -> Vec<ObsPriority> {
    let n = txs.len();
    assert_eq!(dag.node_count(), n, "DAG does not match the transaction list");
    let mut height = vec![0u64; n];
    let mut volume = vec![0u128; n];
    let mut remaining_out: Vec<usize> = (0..n).map(|i| dag.out_degree(i)).collect();
    let mut worklist: VecDeque<TxId> = (0..n).filter(|&i| remaining_out[i] == 0).collect();
    let mut order = Vec::with_capacity(n);

    while let Some(tx) = worklist.pop_front() {
        let t = txs[tx].exec_time();
        let succ = dag.successors(tx);
        height[tx] = t + succ.iter().map(|&s| height[s]).max().unwrap_or(0);
        volume[tx] = succ
            .iter()
            .fold(u128::from(t), |acc, &s| acc.saturating_add(volume[s]));
        order.push(tx);
        for &pred in dag.predecessors(tx) {
            remaining_out[pred] -= 1;
            if remaining_out[pred] == 0 {
                worklist.push_back(pred);
            }
        }
    }
    debug_assert_eq!(order.len(), n, "dependency graph has a cycle");

    if rule == VolumeRule::Descendants {
        volume = descendant_volumes(dag, txs, &order);
    }

    (0..n)
        .map(|id| ObsPriority {
            height: height[id],
            volume: volume[id],
            fanout: dag.out_degree(id),
            id,
        })
        .collect()
}

/// Exact descendant mass using per-node reachability bitsets, visiting nodes
/// in reverse-topological `order`.
fn descendant_volumes(dag: &DependencyDag, txs: &[Transaction], order: &[TxId]) -> Vec<u128> {
    let n = txs.len();
    let words = n.div_ceil(64);
    let mut reach = vec![0u64; n * words];
    for &tx in order {
        for &s in dag.successors(tx) {
            // Successors always carry larger ids.
            let (lo, hi) = reach.split_at_mut(s * words);
            let (dst, src) = (&mut lo[tx * words..(tx + 1) * words], &hi[..words]);
            for (d, w) in dst.iter_mut().zip(src) {
                *d |= w;
            }
            reach[tx * words + s / 64] |= 1 << (s % 64);
        }
    }
    (0..n)
        .map(|tx| {
            let row = &reach[tx * words..(tx + 1) * words];
            let mut total = u128::from(txs[tx].exec_time());
            for (w, &bits) in row.iter().enumerate() {
                let mut bits = bits;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    total += u128::from(txs[w * 64 + b].exec_time());
                    bits &= bits - 1;
                }
            }
            total
        })
        .collect()
}

/// Running transactions keyed by `(end, core, id)`, earliest first.
struct Cores {
    free: BTreeSet<usize>,
    running: BinaryHeap<Reverse<(u64, usize, TxId)>>,
}

impl Cores {
    fn new(p: usize) -> Self {
        assert!(p >= 1, "at least one core is required");
        Cores {
            free: (0..p).collect(),
            running: BinaryHeap::new(),
        }
    }

    fn has_free(&self) -> bool {
        !self.free.is_empty()
    }

    fn start(&mut self, schedule: &mut Schedule, tx: &Transaction, now: u64) {
        let core = self.free.pop_first().expect("no free core");
        schedule.place(tx.id(), core, now, tx.exec_time());
        self.running.push(Reverse((now + tx.exec_time(), core, tx.id())));
    }

    /// Advances to the next completion instant and retires every transaction
    /// finishing then. Returns `None` when nothing is running.
    fn advance(&mut self, finished: &mut Vec<TxId>) -> Option<u64> {
        finished.clear();
        let Reverse((now, _, _)) = *self.running.peek()?;
        while let Some(&Reverse((end, core, id))) = self.running.peek() {
            if end != now {
                break;
            }
            self.running.pop();
            self.free.insert(core);
            finished.push(id);
        }
        Some(now)
    }
}

/// Event-driven list scheduling: whenever a core is free, the ready
/// transaction with the smallest priority is dispatched.
pub fn schedule_obs(
    txs: &[Transaction],
    p: usize,
    priorities: &[ObsPriority],
    dag: &DependencyDag,
) -> Schedule {
    let n = txs.len();
    let mut schedule = Schedule::new(p, n);
    let mut cores = Cores::new(p);
    let mut in_degree: Vec<usize> = (0..n).map(|i| dag.in_degree(i)).collect();
    let mut ready: BinaryHeap<Reverse<ObsPriority>> = (0..n)
        .filter(|&i| in_degree[i] == 0)
        .map(|i| Reverse(priorities[i]))
        .collect();
    let mut finished = Vec::new();
    let mut now = 0;

    loop {
        while cores.has_free() {
            let Some(Reverse(next)) = ready.pop() else { break };
            cores.start(&mut schedule, &txs[next.id], now);
        }
        match cores.advance(&mut finished) {
            Some(t) => now = t,
            None => break,
        }
        for &done in &finished {
            for &succ in dag.successors(done) {
                in_degree[succ] -= 1;
                if in_degree[succ] == 0 {
                    ready.push(Reverse(priorities[succ]));
                }
            }
        }
    }
    debug_assert!(ready.is_empty());
    schedule
}

/// Dispatch discipline of the in-order baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolDispatch {
    /// Scan pending transactions in block order and stop at the first one
    /// that conflicts with a running transaction.
    #[default]
    HeadOfLine,
    /// Skip blocked transactions and keep scanning. A transaction is
    /// dispatchable once every earlier conflicting transaction has finished.
    SkipBlocked,
}

/// In-order declared-access baseline with head-of-line blocking.
pub fn schedule_sol(txs: &[Transaction], p: usize, graph: &ConflictGraph) -> Schedule {
    schedule_sol_with(txs, p, graph, SolDispatch::HeadOfLine)
}

pub fn schedule_sol_with(
    txs: &[Transaction],
    p: usize,
    graph: &ConflictGraph,
    dispatch: SolDispatch,
) -> Schedule {
    let n = txs.len();
    let mut schedule = Schedule::new(p, n);
    let mut cores = Cores::new(p);
    // Unfinished earlier conflicting transactions per id.
    let mut blockers: Vec<usize> = (0..n)
        .map(|i| graph.neighbors(i).partition_point(|&j| j < i))
        .collect();
    let mut pending: VecDeque<TxId> = (0..n).collect();
    let mut unblocked: BTreeSet<TxId> = (0..n).filter(|&i| blockers[i] == 0).collect();
    let mut finished = Vec::new();
    let mut now = 0;

    loop {
        match dispatch {
            SolDispatch::HeadOfLine => {
                // The head's earlier conflicts are all dispatched; an unfinished
                // one is necessarily running.
                while cores.has_free() {
                    match pending.front() {
                        Some(&head) if blockers[head] == 0 => {
                            pending.pop_front();
                            cores.start(&mut schedule, &txs[head], now);
                        }
                        _ => break,
                    }
                }
            }
            SolDispatch::SkipBlocked => {
                while cores.has_free() {
                    let Some(next) = unblocked.pop_first() else { break };
                    cores.start(&mut schedule, &txs[next], now);
                }
            }
        }
        match cores.advance(&mut finished) {
            Some(t) => now = t,
            None => break,
        }
        for &done in &finished {
            for &later in graph.neighbors(done).iter().filter(|&&j| j > done) {
                blockers[later] -= 1;
                if blockers[later] == 0 && dispatch == SolDispatch::SkipBlocked {
                    unblocked.insert(later);
                }
            }
        }
    }
    schedule
}

/// Full GH pipeline for a block: DAG, priorities, list scheduling.
pub fn run_obs(block: &Workload, p: usize) -> Schedule {
    let txs = block.txs();
    let dag = build_dag(txs);
    let priorities = preprocess(&dag, txs);
    schedule_obs(txs, p, &priorities, &dag)
}
