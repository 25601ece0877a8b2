//! Builders for the four scheduling programs.
//!
//! Constraint families are emitted in the order they are written down and
//! every constant is moved to the right-hand side, so a constraint such as
//! `e_i <= s_j + B((1 - y) + (1 - z))` becomes `e_i - s_j + B y + B z <= 2B`.

use crate::model::{ConflictGraph, DependencyDag, Transaction};

use super::model::{
    ExactModel, Formulation, Instance, LinExpr, ModelMeta, Relation, Sense, VarId, VarKind,
};
use super::ExactError;

/// Same-core linearisation variables of one non-conflicting pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct PairVars {
    pub i: usize,
    pub j: usize,
    pub w: Vec<VarId>,
    pub y: VarId,
    pub z: VarId,
}

/// Where each family of variables lives, so solutions can be written back.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) enum Layout {
    /// Model did not come from a builder (e.g. parsed from a file).
    #[default]
    Opaque,
    ObsHom {
        x: Vec<Vec<VarId>>,
        y: Vec<VarId>,
    },
    ObsHet {
        x: Vec<Vec<VarId>>,
        s: Vec<VarId>,
        e: Vec<VarId>,
        makespan: VarId,
        pairs: Vec<PairVars>,
    },
    PbcHom {
        x: Vec<Vec<VarId>>,
    },
    PbcHet {
        v: Vec<VarId>,
        x: Vec<Vec<VarId>>,
        s: Vec<VarId>,
        e: Vec<VarId>,
        /// One order variable per conflict pair, aligned with `Instance::pairs`.
        conflict_y: Vec<VarId>,
        pairs: Vec<PairVars>,
    },
}

/// Pairs `i < j` that are not in `pairs` (which must be sorted).
pub(crate) fn non_conflicting_pairs(n: usize, pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if pairs.get(k) == Some(&(i, j)) {
                k += 1;
            } else {
                out.push((i, j));
            }
        }
    }
    out
}

fn weight_coef(w: u128) -> Result<i128, ExactError> {
    i128::try_from(w).map_err(|_| ExactError::WeightOverflow(w))
}

/// Program with one binary per (transaction, round) plus round-usage flags;
/// minimises the number of rounds used on `p` cores.
pub fn build_obs_hom(dag: &DependencyDag, p: usize, rounds: u64) -> ExactModel {
    let n = dag.node_count();
    let r_count = rounds as usize;
    let arcs: Vec<(usize, usize)> = dag.edges().collect();
    let mut m = ExactModel::new(Sense::Minimize);

    let x: Vec<Vec<VarId>> = (0..n)
        .map(|i| {
            (0..r_count)
                .map(|r| m.add_var(format!("x_{i}_{r}"), VarKind::Binary))
                .collect()
        })
        .collect();
    let y: Vec<VarId> = (0..r_count)
        .map(|r| m.add_var(format!("y_{r}"), VarKind::Binary))
        .collect();
    for &yr in &y {
        m.objective.push(yr, 1);
    }

    for (i, xi) in x.iter().enumerate() {
        let mut e = LinExpr::new();
        for &v in xi {
            e.push(v, 1);
        }
        m.add_constraint(format!("once_{i}"), e, Relation::Eq, 1);
    }
    for r in 0..r_count {
        let mut e = LinExpr::new();
        for xi in &x {
            e.push(xi[r], 1);
        }
        e.push(y[r], -(p as i128));
        m.add_constraint(format!("cap_{r}"), e, Relation::Le, 0);
    }
    for &(i, j) in &arcs {
        for r in 0..r_count {
            let mut e = LinExpr::new();
            for t in 0..=r {
                e.push(x[j][t], 1);
            }
            for t in 0..r {
                e.push(x[i][t], -1);
            }
            m.add_constraint(format!("prec_{i}_{j}_{r}"), e, Relation::Le, 0);
        }
    }
    for r in 1..r_count {
        let e = LinExpr::new().term(y[r - 1], 1).term(y[r], -1);
        m.add_constraint(format!("nogap_{r}"), e, Relation::Ge, 0);
    }

    m.meta = Some(ModelMeta {
        formulation: Formulation::ObsHomogeneous,
        instance: Instance {
            durations: vec![1; n],
            weights: vec![0; n],
            pairs: arcs,
            cores: p,
        },
        rounds: Some(rounds),
        horizon: None,
        layout: Layout::ObsHom { x, y },
    });
    m
}

/// Smallest safe big constant for the makespan program: total execution time.
pub fn default_big_m(txs: &[Transaction]) -> u64 {
    txs.iter().map(Transaction::exec_time).sum()
}

/// Emits `w_ijc` AND-linearisation, the same-core flag and both ordering
/// constraints for every non-conflicting pair.
fn same_core_families(
    m: &mut ExactModel,
    non: &[(usize, usize)],
    x: &[Vec<VarId>],
    s: &[VarId],
    e: &[VarId],
    big: i128,
) -> Vec<PairVars> {
    let p = x.first().map_or(0, Vec::len);
    let mut pairs: Vec<PairVars> = non
        .iter()
        .map(|&(i, j)| PairVars {
            i,
            j,
            w: (0..p)
                .map(|c| m.add_var(format!("w_{i}_{j}_{c}"), VarKind::Binary))
                .collect(),
            y: VarId(usize::MAX),
            z: VarId(usize::MAX),
        })
        .collect();
    for pv in &mut pairs {
        pv.y = m.add_var(format!("y_{}_{}", pv.i, pv.j), VarKind::Binary);
        pv.z = m.add_var(format!("z_{}_{}", pv.i, pv.j), VarKind::Binary);
    }
    for pv in &pairs {
        let (i, j) = (pv.i, pv.j);
        for c in 0..p {
            let w = pv.w[c];
            m.add_constraint(
                format!("andi_{i}_{j}_{c}"),
                LinExpr::new().term(w, 1).term(x[i][c], -1),
                Relation::Le,
                0,
            );
            m.add_constraint(
                format!("andj_{i}_{j}_{c}"),
                LinExpr::new().term(w, 1).term(x[j][c], -1),
                Relation::Le,
                0,
            );
            m.add_constraint(
                format!("and_{i}_{j}_{c}"),
                LinExpr::new().term(w, 1).term(x[i][c], -1).term(x[j][c], -1),
                Relation::Ge,
                -1,
            );
        }
    }
    for pv in &pairs {
        let mut sum = LinExpr::new().term(pv.z, 1);
        for &w in &pv.w {
            sum.push(w, -1);
        }
        m.add_constraint(format!("same_{}_{}", pv.i, pv.j), sum, Relation::Eq, 0);
    }
    for pv in &pairs {
        let (i, j) = (pv.i, pv.j);
        m.add_constraint(
            format!("order1_{i}_{j}"),
            LinExpr::new()
                .term(e[i], 1)
                .term(s[j], -1)
                .term(pv.y, big)
                .term(pv.z, big),
            Relation::Le,
            2 * big,
        );
        m.add_constraint(
            format!("order2_{i}_{j}"),
            LinExpr::new()
                .term(e[j], 1)
                .term(s[i], -1)
                .term(pv.y, -big)
                .term(pv.z, big),
            Relation::Le,
            big,
        );
    }
    pairs
}

/// Makespan program with per-core assignment, start/end times and same-core
/// serialisation of non-conflicting pairs. `big_m` must be at least the total
/// execution time ([`default_big_m`]).
pub fn build_obs_het(
    dag: &DependencyDag,
    txs: &[Transaction],
    p: usize,
    big_m: u64,
) -> Result<ExactModel, ExactError> {
    let n = txs.len();
    assert_eq!(dag.node_count(), n, "dag does not match the block");
    let needed = default_big_m(txs);
    if big_m < needed {
        return Err(ExactError::BigMTooSmall { big_m, needed });
    }
    let big = i128::from(big_m);
    let arcs: Vec<(usize, usize)> = dag.edges().collect();
    let non = non_conflicting_pairs(n, &arcs);
    let mut m = ExactModel::new(Sense::Minimize);

    let x: Vec<Vec<VarId>> = (0..n)
        .map(|i| {
            (0..p)
                .map(|c| m.add_var(format!("x_{i}_{c}"), VarKind::Binary))
                .collect()
        })
        .collect();
    let s: Vec<VarId> = (0..n)
        .map(|i| m.add_var(format!("s_{i}"), VarKind::Integer))
        .collect();
    let e: Vec<VarId> = (0..n)
        .map(|i| m.add_var(format!("e_{i}"), VarKind::Integer))
        .collect();
    let makespan = m.add_var("M", VarKind::Integer);
    m.objective.push(makespan, 1);

    for i in 0..n {
        let mut sum = LinExpr::new();
        for &v in &x[i] {
            sum.push(v, 1);
        }
        m.add_constraint(format!("core_{i}"), sum, Relation::Eq, 1);
    }
    for i in 0..n {
        m.add_constraint(
            format!("start_{i}"),
            LinExpr::new().term(s[i], 1),
            Relation::Ge,
            0,
        );
    }
    for &(i, j) in &arcs {
        m.add_constraint(
            format!("prec_{i}_{j}"),
            LinExpr::new().term(s[j], 1).term(e[i], -1),
            Relation::Ge,
            0,
        );
    }
    for (i, tx) in txs.iter().enumerate() {
        m.add_constraint(
            format!("dur_{i}"),
            LinExpr::new().term(e[i], 1).term(s[i], -1),
            Relation::Eq,
            i128::from(tx.exec_time()),
        );
    }
    for i in 0..n {
        m.add_constraint(
            format!("span_{i}"),
            LinExpr::new().term(makespan, 1).term(e[i], -1),
            Relation::Ge,
            0,
        );
    }
    let pairs = same_core_families(&mut m, &non, &x, &s, &e, big);

    m.meta = Some(ModelMeta {
        formulation: Formulation::ObsHeterogeneous,
        instance: Instance {
            durations: txs.iter().map(Transaction::exec_time).collect(),
            weights: vec![0; n],
            pairs: arcs,
            cores: p,
        },
        rounds: None,
        horizon: Some(big_m),
        layout: Layout::ObsHet {
            x,
            s,
            e,
            makespan,
            pairs,
        },
    });
    Ok(m)
}

/// Round-packing program: at most `p` pairwise non-conflicting transactions
/// per round, at most one round per transaction, maximising total weight.
pub fn build_pbc_hom(
    graph: &ConflictGraph,
    weights: &[u128],
    p: usize,
    rounds: u64,
) -> Result<ExactModel, ExactError> {
    let n = graph.node_count();
    assert_eq!(weights.len(), n, "weights do not match the graph");
    let r_count = rounds as usize;
    let edges: Vec<(usize, usize)> = graph.edges().collect();
    let mut m = ExactModel::new(Sense::Maximize);

    let x: Vec<Vec<VarId>> = (0..n)
        .map(|i| {
            (0..r_count)
                .map(|r| m.add_var(format!("x_{i}_{r}"), VarKind::Binary))
                .collect()
        })
        .collect();
    for (i, xi) in x.iter().enumerate() {
        let w = weight_coef(weights[i])?;
        for &v in xi {
            m.objective.push(v, w);
        }
    }
    for (i, xi) in x.iter().enumerate() {
        let mut sum = LinExpr::new();
        for &v in xi {
            sum.push(v, 1);
        }
        m.add_constraint(format!("once_{i}"), sum, Relation::Le, 1);
    }
    for r in 0..r_count {
        let mut sum = LinExpr::new();
        for xi in &x {
            sum.push(xi[r], 1);
        }
        m.add_constraint(format!("cap_{r}"), sum, Relation::Le, p as i128);
    }
    for &(i, j) in &edges {
        for r in 0..r_count {
            m.add_constraint(
                format!("conf_{i}_{j}_{r}"),
                LinExpr::new().term(x[i][r], 1).term(x[j][r], 1),
                Relation::Le,
                1,
            );
        }
    }

    m.meta = Some(ModelMeta {
        formulation: Formulation::PbcHomogeneous,
        instance: Instance {
            durations: vec![1; n],
            weights: weights.to_vec(),
            pairs: edges,
            cores: p,
        },
        rounds: Some(rounds),
        horizon: None,
        layout: Layout::PbcHom { x },
    });
    Ok(m)
}

/// Selection-and-scheduling program under runtime budget `budget`.
pub fn build_pbc_het(
    graph: &ConflictGraph,
    txs: &[Transaction],
    p: usize,
    budget: u64,
) -> Result<ExactModel, ExactError> {
    let n = txs.len();
    assert_eq!(graph.node_count(), n, "graph does not match the pool");
    let big = i128::from(budget);
    let edges: Vec<(usize, usize)> = graph.edges().collect();
    let non = non_conflicting_pairs(n, &edges);
    let mut m = ExactModel::new(Sense::Maximize);

    let v: Vec<VarId> = (0..n)
        .map(|i| m.add_var(format!("v_{i}"), VarKind::Binary))
        .collect();
    let x: Vec<Vec<VarId>> = (0..n)
        .map(|i| {
            (0..p)
                .map(|c| m.add_var(format!("x_{i}_{c}"), VarKind::Binary))
                .collect()
        })
        .collect();
    let s: Vec<VarId> = (0..n)
        .map(|i| m.add_var(format!("s_{i}"), VarKind::Integer))
        .collect();
    let e: Vec<VarId> = (0..n)
        .map(|i| m.add_var(format!("e_{i}"), VarKind::Integer))
        .collect();
    let conflict_y: Vec<VarId> = edges
        .iter()
        .map(|&(i, j)| m.add_var(format!("y_{i}_{j}"), VarKind::Binary))
        .collect();
    for (i, tx) in txs.iter().enumerate() {
        m.objective.push(v[i], weight_coef(tx.reward())?);
    }

    for i in 0..n {
        let mut sum = LinExpr::new();
        for &xc in &x[i] {
            sum.push(xc, 1);
        }
        sum.push(v[i], -1);
        m.add_constraint(format!("core_{i}"), sum, Relation::Eq, 0);
    }
    for (i, tx) in txs.iter().enumerate() {
        m.add_constraint(
            format!("dur_{i}"),
            LinExpr::new()
                .term(e[i], 1)
                .term(s[i], -1)
                .term(v[i], -i128::from(tx.exec_time())),
            Relation::Eq,
            0,
        );
    }
    for i in 0..n {
        m.add_constraint(
            format!("sact_{i}"),
            LinExpr::new().term(s[i], 1).term(v[i], -big),
            Relation::Le,
            0,
        );
        m.add_constraint(
            format!("eact_{i}"),
            LinExpr::new().term(e[i], 1).term(v[i], -big),
            Relation::Le,
            0,
        );
    }
    for (k, &(i, j)) in edges.iter().enumerate() {
        let y = conflict_y[k];
        m.add_constraint(
            format!("conf1_{i}_{j}"),
            LinExpr::new().term(e[i], 1).term(s[j], -1).term(y, big),
            Relation::Le,
            big,
        );
        m.add_constraint(
            format!("conf2_{i}_{j}"),
            LinExpr::new().term(e[j], 1).term(s[i], -1).term(y, -big),
            Relation::Le,
            0,
        );
    }
    let pairs = same_core_families(&mut m, &non, &x, &s, &e, big);

    m.meta = Some(ModelMeta {
        formulation: Formulation::PbcHeterogeneous,
        instance: Instance {
            durations: txs.iter().map(Transaction::exec_time).collect(),
            weights: txs.iter().map(Transaction::reward).collect(),
            pairs: edges,
            cores: p,
        },
        rounds: None,
        horizon: Some(budget),
        layout: Layout::PbcHet {
            v,
            x,
            s,
            e,
            conflict_y,
            pairs,
        },
    });
    Ok(m)
}
