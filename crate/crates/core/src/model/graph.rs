use super::TxId;

/// Undirected conflict relation over a transaction set.
///
/// Adjacency lists are sorted ascending, symmetric and irreflexive.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConflictGraph {
    adjacency: Vec<Vec<TxId>>,
    edge_count: usize,
}

impl ConflictGraph {
    /// Builds a graph from per-node neighbour lists. Lists are sorted and
    /// deduplicated; callers must supply a symmetric, irreflexive relation.
    pub(crate) fn from_adjacency(mut adjacency: Vec<Vec<TxId>>) -> Self {
        let mut degree_sum = 0;
        for (i, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            debug_assert!(list.binary_search(&i).is_err(), "self-conflict on {i}");
            degree_sum += list.len();
        }
        ConflictGraph {
            adjacency,
            edge_count: degree_sum / 2,
        }
    }

    /// Graph from an explicit edge list; pairs may come in either orientation.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (TxId, TxId)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            assert!(a != b, "self-conflict on {a}");
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        Self::from_adjacency(adjacency)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, id: TxId) -> &[TxId] {
        &self.adjacency[id]
    }

    pub fn degree(&self, id: TxId) -> usize {
        self.adjacency[id].len()
    }

    pub fn contains(&self, a: TxId, b: TxId) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges as `(i, j)` with `i < j`, ordered lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (TxId, TxId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Orders every edge by id, giving the dependency DAG of a block.
    pub fn to_dag(&self) -> DependencyDag {
        let n = self.node_count();
        let mut successors = Vec::with_capacity(n);
        let mut predecessors = Vec::with_capacity(n);
        for (i, list) in self.adjacency.iter().enumerate() {
            let split = list.partition_point(|&j| j < i);
            predecessors.push(list[..split].to_vec());
            successors.push(list[split..].to_vec());
        }
        DependencyDag {
            successors,
            predecessors,
            edge_count: self.edge_count,
        }
    }
}

/// Conflict edges directed by block order: `(i, j)` exists iff the two
/// transactions conflict and `i < j`. Acyclic by construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependencyDag {
    successors: Vec<Vec<TxId>>,
    predecessors: Vec<Vec<TxId>>,
    edge_count: usize,
}

impl DependencyDag {
    /// DAG from explicit `(from, to)` arcs; every arc must satisfy `from < to`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (TxId, TxId)>) -> Self {
        let mut successors = vec![Vec::new(); n];
        let mut predecessors = vec![Vec::new(); n];
        for (a, b) in edges {
            assert!(a < b, "arc ({a}, {b}) is not in block order");
            successors[a].push(b);
            predecessors[b].push(a);
        }
        let mut edge_count = 0;
        for list in successors.iter_mut().chain(predecessors.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        for list in &successors {
            edge_count += list.len();
        }
        DependencyDag {
            successors,
            predecessors,
            edge_count,
        }
    }

    pub fn node_count(&self) -> usize {
        self.successors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn successors(&self, id: TxId) -> &[TxId] {
        &self.successors[id]
    }

    pub fn predecessors(&self, id: TxId) -> &[TxId] {
        &self.predecessors[id]
    }

    pub fn in_degree(&self, id: TxId) -> usize {
        self.predecessors[id].len()
    }

    pub fn out_degree(&self, id: TxId) -> usize {
        self.successors[id].len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (TxId, TxId)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().map(move |&j| (i, j)))
    }

    /// The undirected graph underlying this DAG.
    pub fn to_conflict_graph(&self) -> ConflictGraph {
        let adjacency = self
            .predecessors
            .iter()
            .zip(&self.successors)
            .map(|(pred, succ)| pred.iter().chain(succ).copied().collect())
            .collect();
        ConflictGraph::from_adjacency(adjacency)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dag_and_graph_agree() {
        let graph = ConflictGraph::from_edges(4, [(2, 0), (1, 3), (0, 1)]);
        assert_eq!(graph.edge_count(), 3);
        assert_eq!(graph.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 3)]);
        let dag = graph.to_dag();
        assert_eq!(dag.successors(0), &[1, 2]);
        assert_eq!(dag.predecessors(3), &[1]);
        assert_eq!(dag.in_degree(0), 0);
        assert_eq!(dag.out_degree(0), 2);
        assert_eq!(dag.to_conflict_graph(), graph);
    }

    #[test]
    #[should_panic(expected = "not in block order")]
    fn dag_rejects_backward_arcs() {
        DependencyDag::from_edges(2, [(1, 0)]);
    }
}
