//! Embedded branch-and-bound for the four programs.
//!
//! The search branches on the combinatorial decisions the binaries encode
//! (round or core membership, pair orientation, selection) rather than on an
//! LP relaxation. Every engine is warm-started with the matching heuristic,
//! explores depth-first in priority order and prunes with the bounds:
//! `max(critical path, ceil(sum t / p))` for makespan, fractional knapsack for
//! reward. The winning schedule is written back into a full assignment of the
//! model's variables and checked against every constraint.

use std::cmp::Reverse;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::model::{ConflictGraph, DependencyDag, Schedule, Transaction};
use crate::obs::{preprocess, schedule_obs};
use crate::pbc::{schedule_pbc, PbcPriority};

use super::build::Layout;
use super::model::{ExactModel, Formulation, Instance};
use super::ExactError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub time_limit: Duration,
    /// Stop after this many search nodes (reported as `Feasible`).
    pub node_limit: Option<u64>,
}

impl SolveOptions {
    pub fn with_time_limit(time_limit: Duration) -> Self {
        SolveOptions {
            time_limit,
            node_limit: None,
        }
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self::with_time_limit(Duration::from_secs(60))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SolveStatus {
    /// Search completed; the objective is the true optimum.
    Optimal,
    /// Node limit reached; the incumbent is feasible but not proven optimal.
    Feasible,
    /// Search completed without finding any feasible point.
    Infeasible,
    /// Time limit reached; an incumbent may or may not be present.
    TimedOut,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactSolution {
    pub status: SolveStatus,
    pub objective: Option<i128>,
    pub assignment: Option<Vec<i128>>,
    /// The incumbent as a schedule. Round-based programs use unit durations,
    /// so start times are round indices.
    pub schedule: Option<Schedule>,
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    Time,
    Nodes,
}

struct Limits {
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    nodes: u64,
    stop: Option<Stop>,
}

impl Limits {
    fn new(options: &SolveOptions) -> Self {
        Limits {
            deadline: Instant::now().checked_add(options.time_limit),
            node_limit: options.node_limit,
            nodes: 0,
            stop: None,
        }
    }

    /// Counts one node; false once the search has to stop.
    fn tick(&mut self) -> bool {
        if self.stop.is_some() {
            return false;
        }
        self.nodes += 1;
        if self.node_limit.is_some_and(|l| self.nodes > l) {
            self.stop = Some(Stop::Nodes);
        } else if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.stop = Some(Stop::Time);
        }
        self.stop.is_none()
    }
}

/// A solution in scheduling terms, before it is mapped to variables.
#[derive(Debug, Clone)]
enum Found {
    /// Round per transaction; `None` = not selected.
    Rounds(Vec<Option<usize>>),
    /// Core and start per transaction; `None` = not selected.
    Timed(Vec<Option<(usize, u64)>>),
}

pub fn solve_exact(model: &ExactModel, options: &SolveOptions) -> Result<ExactSolution, ExactError> {
    let meta = model.meta.as_ref().ok_or(ExactError::NoInstance)?;
    let inst = &meta.instance;
    if inst.cores == 0 {
        return Err(ExactError::NoCores);
    }
    let mut limits = Limits::new(options);
    let (found, complete) = match meta.formulation {
        Formulation::ObsHomogeneous => {
            obs_rounds(inst, meta.rounds.unwrap_or(0) as usize, &mut limits)
        }
        Formulation::PbcHomogeneous => {
            pbc_rounds(inst, meta.rounds.unwrap_or(0) as usize, &mut limits)
        }
        Formulation::ObsHeterogeneous => Disjunctive::obs(inst).run(&mut limits),
        Formulation::PbcHeterogeneous => {
            Disjunctive::pbc(inst, meta.horizon.unwrap_or(0)).run(&mut limits)
        }
    };
    let status = match (complete, limits.stop, found.is_some()) {
        (true, _, true) => SolveStatus::Optimal,
        (true, _, false) => SolveStatus::Infeasible,
        (false, Some(Stop::Nodes), true) => SolveStatus::Feasible,
        (false, _, _) => SolveStatus::TimedOut,
    };
    let mut solution = ExactSolution {
        status,
        objective: None,
        assignment: None,
        schedule: None,
        nodes: limits.nodes,
    };
    if let Some(found) = found {
        let (assignment, schedule) = materialize(model, &found)?;
        model.check(&assignment).map_err(ExactError::Internal)?;
        solution.objective = Some(model.objective_value(&assignment));
        solution.assignment = Some(assignment);
        solution.schedule = Some(schedule);
    }
    Ok(solution)
}

fn unit_txs(durations: &[u64]) -> Vec<Transaction> {
    durations
        .iter()
        .enumerate()
        .map(|(i, &d)| Transaction::new(i, d, 0, [], []).expect("durations are positive"))
        .collect()
}

fn successors(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut succ = vec![Vec::new(); n];
    for &(i, j) in pairs {
        succ[i].push(j);
    }
    succ
}

fn predecessors(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); n];
    for &(i, j) in pairs {
        pred[j].push(i);
    }
    pred
}

/// Longest duration-weighted path starting at each node (arcs go to larger ids).
fn tails(durations: &[u64], succ: &[Vec<usize>]) -> Vec<u64> {
    let mut tail = vec![0u64; durations.len()];
    for i in (0..durations.len()).rev() {
        tail[i] = durations[i] + succ[i].iter().map(|&j| tail[j]).max().unwrap_or(0);
    }
    tail
}

fn adjacency_matrix(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for &(i, j) in pairs {
        adj[i][j] = true;
        adj[j][i] = true;
    }
    adj
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

// ---------------------------------------------------------------------------
// Ordered blocks, unit times: assign each transaction to a round.

struct ObsRounds<'a> {
    p: usize,
    rounds: usize,
    order: Vec<usize>,
    preds: &'a [Vec<usize>],
    height: Vec<u64>,
    round_of: Vec<usize>,
    load: Vec<usize>,
    est: Vec<usize>,
    floor: usize,
    best: usize,
    best_rounds: Option<Vec<usize>>,
}

const NONE: usize = usize::MAX;

fn obs_rounds(inst: &Instance, rounds: usize, limits: &mut Limits) -> (Option<Found>, bool) {
    let n = inst.len();
    let p = inst.cores;
    let succ = successors(n, &inst.pairs);
    let preds = predecessors(n, &inst.pairs);
    let height = tails(&vec![1; n], &succ);

    let dag = DependencyDag::from_edges(n, inst.pairs.iter().copied());
    let txs = unit_txs(&vec![1; n]);
    let gh = schedule_obs(&txs, p, &preprocess(&dag, &txs), &dag);
    let gh_rounds = gh.makespan() as usize;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (Reverse(height[i]), i));
    let floor = ceil_div(n as u64, p as u64).max(height.iter().copied().max().unwrap_or(0)) as usize;

    let mut search = ObsRounds {
        p,
        rounds,
        order,
        preds: &preds,
        height,
        round_of: vec![NONE; n],
        load: vec![0; rounds],
        est: vec![0; n],
        floor,
        best: rounds + 1,
        best_rounds: None,
    };
    if gh_rounds <= rounds {
        search.best = gh_rounds;
        search.best_rounds = Some(
            (0..n)
                .map(|i| gh.slot(i).expect("list schedule places everything").start as usize)
                .collect(),
        );
    }
    let complete = if !limits.tick() {
        false
    } else if search.best <= search.floor {
        true
    } else {
        search.dfs(0, 0, limits)
    };
    let found = search
        .best_rounds
        .map(|r| Found::Rounds(r.into_iter().map(Some).collect()));
    (found, complete)
}

impl ObsRounds<'_> {
    fn lower_bound(&mut self, k: usize, used: usize) -> usize {
        let mut lb = used.max(self.floor);
        for &j in &self.order[k..] {
            let mut e = 0;
            for &q in &self.preds[j] {
                let ready = if self.round_of[q] != NONE {
                    self.round_of[q] + 1
                } else {
                    self.est[q] + 1
                };
                e = e.max(ready);
            }
            self.est[j] = e;
            lb = lb.max(e + self.height[j] as usize);
        }
        lb
    }

    /// Returns false if interrupted by a limit.
    fn dfs(&mut self, k: usize, used: usize, limits: &mut Limits) -> bool {
        if k == self.order.len() {
            if used < self.best {
                self.best = used;
                self.best_rounds = Some(self.round_of.clone());
            }
            return true;
        }
        let i = self.order[k];
        let est = self.preds[i]
            .iter()
            .map(|&q| self.round_of[q] + 1)
            .max()
            .unwrap_or(0);
        let h = self.height[i] as usize;
        let last = self.rounds.min(self.best.saturating_sub(h));
        for r in est..last {
            if self.load[r] == self.p {
                continue;
            }
            if !limits.tick() {
                return false;
            }
            self.round_of[i] = r;
            self.load[r] += 1;
            let next_used = used.max(r + 1);
            let ok = if self.lower_bound(k + 1, next_used) < self.best {
                self.dfs(k + 1, next_used, limits)
            } else {
                true
            };
            self.load[r] -= 1;
            self.round_of[i] = NONE;
            if !ok {
                return false;
            }
            if self.best <= self.floor {
                return true;
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Block construction, unit times: pack rounds with non-conflicting items.

struct PbcRounds<'a> {
    p: usize,
    rounds: usize,
    order: Vec<usize>,
    weights: &'a [u128],
    adj: Vec<Vec<bool>>,
    /// `prefix[k]` = total weight of `order[..k]`.
    prefix: Vec<u128>,
    round_of: Vec<usize>,
    load: Vec<usize>,
    best: u128,
    best_rounds: Option<Vec<usize>>,
}

fn pbc_rounds(inst: &Instance, rounds: usize, limits: &mut Limits) -> (Option<Found>, bool) {
    let n = inst.len();
    let p = inst.cores;
    let graph = ConflictGraph::from_edges(n, inst.pairs.iter().copied());
    let txs = unit_txs(&vec![1; n]);
    let priorities: Vec<PbcPriority> = (0..n)
        .map(|i| PbcPriority {
            reward: inst.weights[i],
            exec_time: 1,
            degree: graph.degree(i),
            id: i,
        })
        .collect();
    let gh = schedule_pbc(&txs, p, rounds as u64, &priorities, &graph);

    let mut order: Vec<usize> = (0..n).filter(|&i| inst.weights[i] > 0).collect();
    order.sort_by_key(|&i| (Reverse(inst.weights[i]), i));
    let mut prefix = vec![0u128; order.len() + 1];
    for (k, &i) in order.iter().enumerate() {
        prefix[k + 1] = prefix[k].saturating_add(inst.weights[i]);
    }

    let mut search = PbcRounds {
        p,
        rounds,
        order,
        weights: &inst.weights,
        adj: adjacency_matrix(n, &inst.pairs),
        prefix,
        round_of: vec![NONE; n],
        load: vec![0; rounds],
        best: gh.selected.iter().map(|&i| inst.weights[i]).sum(),
        best_rounds: Some(
            (0..n)
                .map(|i| gh.schedule.slot(i).map_or(NONE, |s| s.start as usize))
                .collect(),
        ),
    };
    let complete = limits.tick() && search.dfs(0, 0, 0, 0, limits);
    let found = search.best_rounds.map(|r| {
        Found::Rounds(r.into_iter().map(|x| (x != NONE).then_some(x)).collect())
    });
    (found, complete)
}

impl PbcRounds<'_> {
    fn dfs(&mut self, k: usize, assigned: usize, opened: usize, value: u128, limits: &mut Limits) -> bool {
        let cap = self.p * self.rounds - assigned;
        let end = (k + cap).min(self.order.len());
        if value + (self.prefix[end] - self.prefix[k]) <= self.best {
            return true;
        }
        if k == self.order.len() || cap == 0 {
            return true;
        }
        let i = self.order[k];
        let w = self.weights[i];
        for r in 0..self.rounds.min(opened + 1) {
            if self.load[r] == self.p {
                continue;
            }
            if self.order[..k]
                .iter()
                .any(|&j| self.round_of[j] == r && self.adj[i][j])
            {
                continue;
            }
            if !limits.tick() {
                return false;
            }
            self.round_of[i] = r;
            self.load[r] += 1;
            if value + w > self.best {
                self.best = value + w;
                self.best_rounds = Some(self.round_of.clone());
            }
            let ok = self.dfs(k + 1, assigned + 1, opened.max(r + 1), value + w, limits);
            self.load[r] -= 1;
            self.round_of[i] = NONE;
            if !ok {
                return false;
            }
        }
        if !limits.tick() {
            return false;
        }
        self.dfs(k + 1, assigned, opened, value, limits)
    }
}

// ---------------------------------------------------------------------------
// Timed programs: choose a core per transaction and orient every pair that
// must not overlap (same core, or conflicting in block construction). Start
// times are the earliest ones compatible with the resulting arc set.

struct Disjunctive {
    d: Vec<u64>,
    w: Vec<u128>,
    p: usize,
    /// Fixed precedence arcs into each node (ordered blocks only).
    preds: Vec<Vec<usize>>,
    conflict: Vec<Vec<bool>>,
    /// `Some(B)` for block construction (maximise weight within B).
    budget: Option<u64>,
    order: Vec<usize>,
    tail: Vec<u64>,
    floor: u64,

    core: Vec<usize>,
    placed: Vec<usize>,
    succ: Vec<Vec<usize>>,
    used_cores: usize,
    work: u64,
    weight: u128,
    head: Vec<u64>,
    scratch: Vec<u64>,

    best_span: u64,
    best_weight: u128,
    best: Option<Vec<Option<(usize, u64)>>>,
}

impl Disjunctive {
    fn base(inst: &Instance) -> Self {
        let n = inst.len();
        Disjunctive {
            d: inst.durations.clone(),
            w: inst.weights.clone(),
            p: inst.cores,
            preds: vec![Vec::new(); n],
            conflict: vec![vec![false; n]; n],
            budget: None,
            order: Vec::new(),
            tail: vec![0; n],
            floor: 0,
            core: vec![NONE; n],
            placed: Vec::new(),
            succ: vec![Vec::new(); n],
            used_cores: 0,
            work: 0,
            weight: 0,
            head: vec![0; n],
            scratch: vec![0; n],
            best_span: u64::MAX,
            best_weight: 0,
            best: None,
        }
    }

    fn obs(inst: &Instance) -> Self {
        let n = inst.len();
        let mut s = Self::base(inst);
        let succ = successors(n, &inst.pairs);
        s.preds = predecessors(n, &inst.pairs);
        s.tail = tails(&s.d, &succ);
        let total: u64 = s.d.iter().sum();
        s.floor = ceil_div(total, s.p as u64).max(s.tail.iter().copied().max().unwrap_or(0));
        s.order = (0..n).collect();
        let dag = DependencyDag::from_edges(n, inst.pairs.iter().copied());
        let txs = unit_txs(&s.d);
        let prio = preprocess(&dag, &txs);
        s.order.sort_by_key(|&i| prio[i]);

        let gh = schedule_obs(&txs, s.p, &prio, &dag);
        s.best_span = gh.makespan();
        s.best = Some(gh.slots().iter().map(|o| o.map(|sl| (sl.core, sl.start))).collect());
        s
    }

    fn pbc(inst: &Instance, budget: u64) -> Self {
        let n = inst.len();
        let mut s = Self::base(inst);
        s.conflict = adjacency_matrix(n, &inst.pairs);
        s.budget = Some(budget);
        let graph = ConflictGraph::from_edges(n, inst.pairs.iter().copied());
        let prio: Vec<PbcPriority> = (0..n)
            .map(|i| PbcPriority {
                reward: s.w[i],
                exec_time: s.d[i],
                degree: graph.degree(i),
                id: i,
            })
            .collect();
        s.order = (0..n).filter(|&i| s.d[i] <= budget && s.w[i] > 0).collect();
        s.order.sort_by_key(|&i| prio[i]);

        let txs = unit_txs(&s.d);
        let gh = schedule_pbc(&txs, s.p, budget, &prio, &graph);
        s.best_weight = gh.selected.iter().map(|&i| s.w[i]).sum();
        s.best = Some(
            gh.schedule
                .slots()
                .iter()
                .map(|o| o.map(|sl| (sl.core, sl.start)))
                .collect(),
        );
        s
    }

    fn run(mut self, limits: &mut Limits) -> (Option<Found>, bool) {
        let complete = if !limits.tick() {
            false
        } else if self.budget.is_none() && self.best_span <= self.floor {
            true
        } else {
            self.place(0, limits)
        };
        (self.best.map(Found::Timed), complete)
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut stack = vec![from];
        let mut seen = vec![false; self.d.len()];
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            for &v in &self.succ[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }

    /// Earliest starts over the placed set; returns the makespan.
    fn compute_heads(&mut self) -> u64 {
        let mut indeg = vec![0usize; self.d.len()];
        for &u in &self.placed {
            for &v in &self.succ[u] {
                indeg[v] += 1;
            }
        }
        let mut queue: Vec<usize> = self.placed.iter().copied().filter(|&u| indeg[u] == 0).collect();
        for &u in &self.placed {
            self.head[u] = 0;
        }
        let mut span = 0;
        while let Some(u) = queue.pop() {
            let end = self.head[u] + self.d[u];
            span = span.max(end);
            for k in 0..self.succ[u].len() {
                let v = self.succ[u][k];
                self.head[v] = self.head[v].max(end);
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        span
    }

    fn obs_bound(&mut self, k: usize, span: u64) -> u64 {
        let mut lb = span.max(self.floor);
        for idx in k..self.order.len() {
            let j = self.order[idx];
            let mut e = 0;
            for &q in &self.preds[j] {
                let ready = if self.core[q] != NONE {
                    self.head[q] + self.d[q]
                } else {
                    self.scratch[q] + self.d[q]
                };
                e = e.max(ready);
            }
            self.scratch[j] = e;
            lb = lb.max(e + self.tail[j]);
        }
        lb
    }

    /// Fractional-knapsack bound on weight still obtainable from `order[k..]`.
    fn knapsack_rest(&self, k: usize) -> u128 {
        let budget = self.budget.unwrap_or(0);
        let mut cap = (self.p as u64).saturating_mul(budget).saturating_sub(self.work);
        let mut total = 0u128;
        for &j in &self.order[k..] {
            if cap == 0 {
                break;
            }
            if self.d[j] <= cap {
                cap -= self.d[j];
                total = total.saturating_add(self.w[j]);
            } else {
                let part = self.w[j]
                    .checked_mul(u128::from(cap))
                    .map_or(self.w[j], |x| x / u128::from(self.d[j]));
                total = total.saturating_add(part);
                break;
            }
        }
        total
    }

    fn snapshot(&self) -> Vec<Option<(usize, u64)>> {
        (0..self.d.len())
            .map(|i| (self.core[i] != NONE).then(|| (self.core[i], self.head[i])))
            .collect()
    }

    /// Decides `order[k]`. Returns false if interrupted.
    fn place(&mut self, k: usize, limits: &mut Limits) -> bool {
        if k == self.order.len() {
            return true;
        }
        if self.budget.is_some() && self.weight.saturating_add(self.knapsack_rest(k)) <= self.best_weight {
            return true;
        }
        let i = self.order[k];
        let open = self.used_cores;
        for c in 0..self.p.min(open + 1) {
            if self.budget.is_none() && self.best_span <= self.floor {
                return true;
            }
            self.core[i] = c;
            self.placed.push(i);
            self.used_cores = open.max(c + 1);
            self.work += self.d[i];
            self.weight += self.w[i];
            for q in 0..self.preds[i].len() {
                let q = self.preds[i][q];
                self.succ[q].push(i);
            }
            let linked: Vec<usize> = self.placed[..self.placed.len() - 1]
                .iter()
                .copied()
                .filter(|&m| {
                    (self.core[m] == c || self.conflict[i][m]) && !self.preds[i].contains(&m)
                })
                .collect();
            let ok = self.orient(k, i, &linked, 0, limits);
            for q in 0..self.preds[i].len() {
                let q = self.preds[i][q];
                self.succ[q].pop();
            }
            self.weight -= self.w[i];
            self.work -= self.d[i];
            self.used_cores = open;
            self.placed.pop();
            self.core[i] = NONE;
            if !ok {
                return false;
            }
        }
        if self.budget.is_some() {
            if !limits.tick() {
                return false;
            }
            return self.place(k + 1, limits);
        }
        true
    }

    fn orient(&mut self, k: usize, i: usize, linked: &[usize], idx: usize, limits: &mut Limits) -> bool {
        if idx == linked.len() {
            return self.evaluate(k, limits);
        }
        let m = linked[idx];
        for forward in [true, false] {
            let (a, b) = if forward { (m, i) } else { (i, m) };
            if self.reaches(b, a) {
                continue;
            }
            self.succ[a].push(b);
            let ok = self.orient(k, i, linked, idx + 1, limits);
            self.succ[a].pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn evaluate(&mut self, k: usize, limits: &mut Limits) -> bool {
        if !limits.tick() {
            return false;
        }
        let span = self.compute_heads();
        match self.budget {
            None => {
                if self.obs_bound(k + 1, span) >= self.best_span {
                    return true;
                }
                if k + 1 == self.order.len() {
                    self.best_span = span;
                    self.best = Some(self.snapshot());
                    return true;
                }
            }
            Some(b) => {
                if span > b {
                    return true;
                }
                if self.weight > self.best_weight {
                    self.best_weight = self.weight;
                    self.best = Some(self.snapshot());
                }
            }
        }
        self.place(k + 1, limits)
    }
}

// ---------------------------------------------------------------------------

fn materialize(model: &ExactModel, found: &Found) -> Result<(Vec<i128>, Schedule), ExactError> {
    let meta = model.meta.as_ref().ok_or(ExactError::NoInstance)?;
    let inst = &meta.instance;
    let n = inst.len();
    let mut values = vec![0i128; model.variables.len()];
    let mut schedule = Schedule::new(inst.cores, n);

    let timed: Vec<Option<(usize, u64)>> = match found {
        Found::Timed(t) => t.clone(),
        Found::Rounds(rounds) => {
            let mut next_core = vec![0usize; meta.rounds.unwrap_or(0) as usize];
            rounds
                .iter()
                .map(|r| {
                    r.map(|r| {
                        let c = next_core[r];
                        next_core[r] += 1;
                        (c, r as u64)
                    })
                })
                .collect()
        }
    };
    for (i, slot) in timed.iter().enumerate() {
        if let Some((c, s)) = *slot {
            schedule.place(i, c, s, inst.durations[i]);
        }
    }
    let start = |i: usize| timed[i].map_or(0, |(_, s)| s);
    let end = |i: usize| timed[i].map_or(0, |(_, s)| s + inst.durations[i]);
    let core = |i: usize| timed[i].map(|(c, _)| c);

    match &meta.layout {
        Layout::Opaque => return Err(ExactError::NoInstance),
        Layout::ObsHom { x, y } => {
            let used = schedule.makespan() as usize;
            for i in 0..n {
                values[x[i][start(i) as usize].0] = 1;
            }
            for (r, yr) in y.iter().enumerate() {
                values[yr.0] = i128::from(r < used);
            }
        }
        Layout::PbcHom { x } => {
            for i in 0..n {
                if timed[i].is_some() {
                    values[x[i][start(i) as usize].0] = 1;
                }
            }
        }
        Layout::ObsHet {
            x,
            s,
            e,
            makespan,
            pairs,
        } => {
            for i in 0..n {
                values[x[i][core(i).expect("every transaction is placed")].0] = 1;
                values[s[i].0] = i128::from(start(i));
                values[e[i].0] = i128::from(end(i));
            }
            values[makespan.0] = i128::from(schedule.makespan());
            write_pairs(&mut values, pairs, &core, &start, &end);
        }
        Layout::PbcHet {
            v,
            x,
            s,
            e,
            conflict_y,
            pairs,
        } => {
            for i in 0..n {
                if let Some(c) = core(i) {
                    values[v[i].0] = 1;
                    values[x[i][c].0] = 1;
                    values[s[i].0] = i128::from(start(i));
                    values[e[i].0] = i128::from(end(i));
                }
            }
            for (&(i, j), y) in inst.pairs.iter().zip(conflict_y) {
                let order = match (core(i), core(j)) {
                    (_, None) => false,
                    (None, Some(_)) => true,
                    (Some(_), Some(_)) => end(i) <= start(j),
                };
                values[y.0] = i128::from(order);
            }
            write_pairs(&mut values, pairs, &core, &start, &end);
        }
    }
    Ok((values, schedule))
}

fn write_pairs(
    values: &mut [i128],
    pairs: &[super::build::PairVars],
    core: &dyn Fn(usize) -> Option<usize>,
    start: &dyn Fn(usize) -> u64,
    end: &dyn Fn(usize) -> u64,
) {
    for pv in pairs {
        let shared = match (core(pv.i), core(pv.j)) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        if let Some(c) = shared {
            values[pv.w[c].0] = 1;
            values[pv.z.0] = 1;
            values[pv.y.0] = i128::from(end(pv.i) <= start(pv.j));
        } else {
            values[pv.y.0] = 1;
        }
    }
}
