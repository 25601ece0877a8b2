use std::time::{Duration, Instant};

use blocksched::exact::{
    brute_force, build_obs_het, build_obs_hom, build_pbc_het, build_pbc_hom, default_big_m,
    solve_exact, upper_bound, ExactModel, SolveOptions, SolveStatus,
};
use blocksched::{ConflictGraph, DependencyDag, StateKey, Transaction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Case {
    txs: Vec<Transaction>,
    edges: Vec<(usize, usize)>,
    p: usize,
}

fn random_case(rng: &mut ChaCha8Rng, max_n: usize, unit: bool) -> Case {
    let n = rng.random_range(1..=max_n);
    let density: f64 = rng.random_range(0.0..0.8);
    let p = rng.random_range(1..=4);
    let txs = (0..n)
        .map(|i| {
            let t = if unit { 1 } else { rng.random_range(1..=5) };
            let tip = rng.random_range(0..=9);
            Transaction::new(i, t, tip, [], [StateKey(i as u64)]).unwrap()
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(density) {
                edges.push((i, j));
            }
        }
    }
    Case { txs, edges, p }
}

fn solve(model: &ExactModel) -> (SolveStatus, Option<i128>, Duration) {
    let start = Instant::now();
    let sol = solve_exact(model, &SolveOptions::with_time_limit(Duration::from_secs(20))).unwrap();
    (sol.status, sol.objective, start.elapsed())
}

fn agree(model: &ExactModel, label: &str) {
    let (status, value, took) = solve(model);
    let oracle = brute_force(model).unwrap();
    match oracle {
        Some(v) => {
            assert_eq!(status, SolveStatus::Optimal, "{label}");
            assert_eq!(value, Some(v), "{label}");
        }
        None => assert_eq!(status, SolveStatus::Infeasible, "{label}"),
    }
    assert!(took < Duration::from_secs(1), "{label}: took {took:?}");
}

#[test]
fn solver_matches_enumeration_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..60 {
        let c = random_case(&mut rng, 7, true);
        let n = c.txs.len();
        let dag = DependencyDag::from_edges(n, c.edges.iter().copied());
        let rounds = rng.random_range(1..=n as u64);
        agree(&build_obs_hom(&dag, c.p, rounds), &format!("obs-hom #{round}"));

        let graph = ConflictGraph::from_edges(n, c.edges.iter().copied());
        let weights: Vec<u128> = c.txs.iter().map(Transaction::reward).collect();
        let model = build_pbc_hom(&graph, &weights, c.p, rounds).unwrap();
        agree(&model, &format!("pbc-hom #{round}"));

        let c = random_case(&mut rng, 7, false);
        let n = c.txs.len();
        let dag = DependencyDag::from_edges(n, c.edges.iter().copied());
        let model = build_obs_het(&dag, &c.txs, c.p, default_big_m(&c.txs)).unwrap();
        agree(&model, &format!("obs-het #{round}"));

        let graph = ConflictGraph::from_edges(n, c.edges.iter().copied());
        let budget = rng.random_range(1..=8);
        let model = build_pbc_het(&graph, &c.txs, c.p, budget).unwrap();
        agree(&model, &format!("pbc-het #{round}"));
        let (_, value, _) = solve(&model);
        assert!(value.unwrap() as u128 <= upper_bound(&c.txs, c.p, budget));
    }
}

#[test]
fn makespan_program_scales_homogeneous_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let c = random_case(&mut rng, 7, true);
        let n = c.txs.len();
        let t = rng.random_range(2..=4);
        let txs: Vec<Transaction> = (0..n)
            .map(|i| Transaction::new(i, t, 1, [], [StateKey(i as u64)]).unwrap())
            .collect();
        let dag = DependencyDag::from_edges(n, c.edges.iter().copied());
        let (_, rounds, _) = solve(&build_obs_hom(&dag, c.p, n as u64));
        let (_, span, _) = solve(&build_obs_het(&dag, &txs, c.p, default_big_m(&txs)).unwrap());
        assert_eq!(span.unwrap(), rounds.unwrap() * i128::from(t));
    }
}
