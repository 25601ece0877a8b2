//! The conflict predicate and construction of conflict graphs / dependency DAGs.
//!
//! Two transactions conflict iff they access a common key and at least one of
//! them writes it. Read-read overlap is not a conflict, and a transaction that
//! reads and writes the same key does not conflict with itself.
//!
//! Graphs are built either by the quadratic pairwise loop (kept as the
//! reference) or from a key -> (readers, writers) inverted index, which only
//! visits pairs sharing a key. Both produce identical graphs.

use std::collections::HashMap;

use crate::model::{ConflictGraph, DependencyDag, StateKey, Transaction, TxId};

/// Returns true iff `a` and `b` share a key that at least one of them writes.
pub fn conflicts(a: &Transaction, b: &Transaction) -> bool {
    intersects(a.writes(), b.writes())
        || intersects(a.writes(), b.reads())
        || intersects(a.reads(), b.writes())
}

fn intersects(a: &[StateKey], b: &[StateKey]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Pairwise O(n^2) construction of the undirected conflict graph.
pub fn build_conflict_graph_naive(txs: &[Transaction]) -> ConflictGraph {
    let n = txs.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if conflicts(&txs[i], &txs[j]) {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    ConflictGraph::from_adjacency(adjacency)
}

/// Conflict graph via an inverted index over state keys.
///
/// Worst case (every transaction writes one hot key) is still quadratic, but
/// sparse access lists only pay for pairs that actually share a key.
pub fn build_conflict_graph(txs: &[Transaction]) -> ConflictGraph {
    #[derive(Default)]
    struct Users {
        readers: Vec<TxId>,
        writers: Vec<TxId>,
    }

    let mut index: HashMap<StateKey, Users> = HashMap::new();
    for (pos, tx) in txs.iter().enumerate() {
        for key in tx.reads() {
            // A key both read and written by one transaction counts as written.
            if tx.writes().binary_search(key).is_err() {
                index.entry(*key).or_default().readers.push(pos);
            }
        }
        for key in tx.writes() {
            index.entry(*key).or_default().writers.push(pos);
        }
    }

    let mut adjacency: Vec<Vec<TxId>> = vec![Vec::new(); txs.len()];
    for users in index.values() {
        for (k, &w) in users.writers.iter().enumerate() {
            for &other in users.writers[k + 1..].iter().chain(&users.readers) {
                adjacency[w].push(other);
                adjacency[other].push(w);
            }
        }
    }
    ConflictGraph::from_adjacency(adjacency)
}

/// Dependency DAG of an ordered block: arc `(i, j)` iff `i < j` and the two conflict.
pub fn build_dag(txs: &[Transaction]) -> DependencyDag {
    build_conflict_graph(txs).to_dag()
}

/// Literal pairwise construction of the dependency DAG.
pub fn build_dag_naive(txs: &[Transaction]) -> DependencyDag {
    let n = txs.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if conflicts(&txs[i], &txs[j]) {
                edges.push((i, j));
            }
        }
    }
    DependencyDag::from_edges(n, edges)
}
