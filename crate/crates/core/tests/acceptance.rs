//! Release acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use blocksched::exact::{
    brute_force, build_obs_het, build_obs_hom, build_pbc_het, build_pbc_hom, default_big_m,
    parse_lp, solve_exact, to_lp_string, upper_bound, ExactModel, ModelShape, SolveOptions,
    SolveStatus,
};
use blocksched::experiment::{
    render_csv, render_text, Cell, ExperimentConfig, Method, Metric, Output, Problem, Source,
    Speedup,
};
use blocksched::obs::{schedule_sol_with, SolDispatch};
use blocksched::workload::{
    ingest, records_to_workload, slice_obs, slice_pbc, synth, synth_records, SynthSpec,
};
use blocksched::{
    build_conflict_graph, preprocess, run_experiment, run_obs, run_pbc, schedule_obs,
    schedule_pbc, schedule_rg, schedule_sol, score, validate, ConflictGraph, DependencyDag, Limit,
    Requirement, StateKey, Transaction, Workload, WorkloadKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

const INSTANCES: usize = 500;

/// A random instance with an explicit conflict structure. Every transaction
/// writes a private key, so conflicts come only from `edges`.
struct Case {
    txs: Vec<Transaction>,
    edges: Vec<(usize, usize)>,
    cores: usize,
}

impl Case {
    fn random(rng: &mut ChaCha8Rng, uniform: bool) -> Case {
        let n = rng.random_range(1..=8);
        let density: f64 = rng.random_range(0.0..=1.0);
        let shared_t = rng.random_range(1..=5);
        let txs = (0..n)
            .map(|i| {
                let t = if uniform { shared_t } else { rng.random_range(1..=5) };
                let tip = rng.random_range(0..=5);
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
        Case { txs, edges, cores: rng.random_range(1..=4) }
    }

    fn n(&self) -> usize {
        self.txs.len()
    }

    fn dag(&self) -> DependencyDag {
        DependencyDag::from_edges(self.n(), self.edges.iter().copied())
    }

    fn graph(&self) -> ConflictGraph {
        ConflictGraph::from_edges(self.n(), self.edges.iter().copied())
    }

    fn weights(&self) -> Vec<u128> {
        self.txs.iter().map(Transaction::reward).collect()
    }
}

struct Instances {
    obs_hom: Vec<(Case, u64)>,
    obs_het: Vec<Case>,
    pbc_hom: Vec<(Case, u64)>,
    pbc_het: Vec<(Case, u64)>,
}

fn instances() -> Instances {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut with_rounds = |uniform: bool| {
        let c = Case::random(&mut rng, uniform);
        let r = rng.random_range(1..=c.n() as u64);
        (c, r)
    };
    let obs_hom = (0..INSTANCES).map(|_| with_rounds(true)).collect();
    let pbc_hom = (0..INSTANCES).map(|_| with_rounds(true)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xbeef);
    let obs_het = (0..INSTANCES).map(|_| Case::random(&mut rng, false)).collect();
    let pbc_het = (0..INSTANCES)
        .map(|_| {
            let c = Case::random(&mut rng, false);
            let b = rng.random_range(1..=10);
            (c, b)
        })
        .collect();
    Instances { obs_hom, obs_het, pbc_hom, pbc_het }
}

fn solve(model: &ExactModel) -> (SolveStatus, Option<i128>, Duration) {
    let start = Instant::now();
    let sol = solve_exact(model, &SolveOptions::with_time_limit(Duration::from_secs(30))).unwrap();
    (sol.status, sol.objective, start.elapsed())
}

/// Compares solver and oracle on every model; returns the slowest solve.
fn agree(label: &str, models: &[ExactModel]) -> Result<Duration, String> {
    let mut slowest = Duration::ZERO;
    for (k, m) in models.iter().enumerate() {
        let (status, value, took) = solve(m);
        let oracle = brute_force(m).map_err(|e| e.to_string())?;
        let ok = match oracle {
            Some(v) => status == SolveStatus::Optimal && value == Some(v),
            None => status == SolveStatus::Infeasible,
        };
        if !ok {
            return Err(format!("{label} #{k}: solver {status:?} {value:?}, oracle {oracle:?}"));
        }
        if took >= Duration::from_secs(1) {
            return Err(format!("{label} #{k}: took {took:?}"));
        }
        slowest = slowest.max(took);
    }
    Ok(slowest)
}

fn c1_oracle(inst: &Instances) -> Verdict {
    let obs_hom: Vec<_> = inst.obs_hom.iter().map(|(c, r)| build_obs_hom(&c.dag(), c.cores, *r)).collect();
    let obs_het: Vec<_> = inst
        .obs_het
        .iter()
        .map(|c| build_obs_het(&c.dag(), &c.txs, c.cores, default_big_m(&c.txs)).unwrap())
        .collect();
    let pbc_hom: Vec<_> = inst
        .pbc_hom
        .iter()
        .map(|(c, r)| build_pbc_hom(&c.graph(), &c.weights(), c.cores, *r).unwrap())
        .collect();
    let pbc_het: Vec<_> = inst
        .pbc_het
        .iter()
        .map(|(c, b)| build_pbc_het(&c.graph(), &c.txs, c.cores, *b).unwrap())
        .collect();
    let mut slowest = Duration::ZERO;
    for (label, models) in [
        ("obs-hom", &obs_hom),
        ("obs-het", &obs_het),
        ("pbc-hom", &pbc_hom),
        ("pbc-het", &pbc_het),
    ] {
        slowest = slowest.max(agree(label, models)?);
    }
    Ok(format!("4 x {INSTANCES} instances agree with enumeration; slowest solve {slowest:?}"))
}

fn c2_approximation(inst: &Instances) -> Verdict {
    let cases = inst.obs_hom.iter().map(|(c, _)| c).chain(&inst.obs_het);
    let mut checked = 0;
    let mut worst = 0.0f64;
    for (k, c) in cases.enumerate() {
        let dag = c.dag();
        let priorities = preprocess(&dag, &c.txs);
        for p in [2usize, 3, 4, 8] {
            let opt = brute_force(&build_obs_het(&dag, &c.txs, p, default_big_m(&c.txs)).unwrap())
                .map_err(|e| e.to_string())?
                .ok_or("ordered blocks are always feasible")? as u64;
            let gh = schedule_obs(&c.txs, p, &priorities, &dag).makespan();
            // gh <= (2 - 1/p) opt, kept in integers
            if gh * p as u64 > (2 * p as u64 - 1) * opt {
                return Err(format!("instance {k}, p={p}: GH {gh} vs OPT {opt}"));
            }
            worst = worst.max(gh as f64 / opt as f64);
            checked += 1;
        }
    }
    Ok(format!("{checked} (instance, p) pairs within 2-1/p; worst ratio {worst:.3}"))
}

fn c3_table_structure() -> Verdict {
    let config = ExperimentConfig {
        problem: Problem::Obs,
        kind: WorkloadKind::Homogeneous,
        source: Source::Synth {
            spec: SynthSpec::ConflictFree { n: 5 * 100 * 8, t: 21_000 },
            seed: 0,
        },
        cores: vec![2, 4, 8],
        limits: vec![10, 30, 100],
        pool_factors: vec![1],
        methods: vec![Method::Gh],
        repetitions: 5,
        sol_dispatch: SolDispatch::HeadOfLine,
        exact: Default::default(),
        output: Output::default(),
    };
    let table = run_experiment(&config).map_err(|e| e.to_string())?;
    let records = synth_records(&SynthSpec::ConflictFree { n: 4000, t: 21_000 }, 0);
    for r in [10u64, 30, 100] {
        for p in [2usize, 4, 8] {
            let cell = Cell { limit: r, cores: p, pool_factor: None };
            let rounds = table.get(cell, Method::Gh, Metric::Rounds).ok_or("missing row")?;
            let speedup = table.get(cell, Method::Gh, Metric::Speedup).ok_or("missing row")?;
            if rounds.mean != r as f64 || speedup.mean != p as f64 || rounds.n != 5 {
                return Err(format!("R={r} p={p}: rounds {} speedup {}", rounds.mean, speedup.mean));
            }
            let blocks = slice_obs(&records, WorkloadKind::Homogeneous, p, Limit::Rounds(r), 5)
                .map_err(|e| e.to_string())?;
            for b in &blocks {
                let s = run_obs(b, p);
                if s.makespan() != r * 21_000 || !Speedup::new(b.total_work(), s.makespan()).is_exactly(p as u64) {
                    return Err(format!("R={r} p={p}: makespan {}", s.makespan()));
                }
            }
        }
    }

    let (mut fixtures, mut strictly_worse) = (0, 0);
    for hot in [2u8, 5, 10, 25, 50, 100] {
        for p in [2usize, 4, 8] {
            for r in [10usize, 30] {
                for seed in 0..5 {
                    let spec = SynthSpec::SingleHotKey { n: r * p, t: 21_000, hot_percent: hot };
                    let w = synth(&spec, seed);
                    let graph = build_conflict_graph(w.txs());
                    let gh = run_obs(&w, p).makespan();
                    let sol = schedule_sol(w.txs(), p, &graph).makespan();
                    if sol < gh {
                        return Err(format!("hot={hot}% p={p} R={r} seed={seed}: Sol {sol} beats GH {gh}"));
                    }
                    strictly_worse += usize::from(sol > gh);
                    fixtures += 1;
                }
            }
        }
    }
    if strictly_worse == 0 {
        return Err("Sol never worse than GH on hot-key mixtures".into());
    }
    Ok(format!(
        "conflict-free grid: rounds = R, speedup = p in all 9 cells; Sol <= GH on {fixtures} hot-key fixtures, strictly worse on {strictly_worse}"
    ))
}

fn c4_stress() -> Verdict {
    for p in [2usize, 4, 8] {
        for b in [4u64, 8, 16] {
            let w = synth(&SynthSpec::Stress { cores: p, budget: b }, 0);
            let txs = w.txs();
            let graph = build_conflict_graph(txs);
            let gh = run_pbc(&w, p, b);
            let rg = schedule_rg(txs, p, b, &graph);
            for sel in [&gh, &rg] {
                validate(txs, &sel.schedule, &graph, Requirement::Budget(b)).map_err(|e| e.to_string())?;
            }
            let (ghr, rgr) = (gh.reward(txs), rg.reward(txs));
            if ghr != (p as u128) * u128::from(b) || rgr != u128::from(b) {
                return Err(format!("p={p} B={b}: GH {ghr}, RG {rgr}"));
            }
            for unit in 0..b {
                let running = gh.schedule.entries().filter(|(_, s)| s.start <= unit && unit < s.end).count();
                if running != p {
                    return Err(format!("p={p} B={b}: {running} transactions at time {unit}"));
                }
            }
        }
    }
    Ok("GH reward = p*B with p parallel every unit, RG reward = B, for all 9 cells".into())
}

fn c5_bound_chain(inst: &Instances) -> Verdict {
    // Round programs run against unit-time stand-ins whose tip is the
    // original reward, so the time-based heuristic sees the same weights.
    let hom = inst.pbc_hom.iter().map(|(c, r)| {
        let unit: Vec<Transaction> = c
            .txs
            .iter()
            .map(|t| Transaction::new(t.id(), 1, t.reward() as u64, [], [StateKey(t.id() as u64)]).unwrap())
            .collect();
        (c, unit, *r, build_pbc_hom(&c.graph(), &c.weights(), c.cores, *r).unwrap())
    });
    let het = inst
        .pbc_het
        .iter()
        .map(|(c, b)| (c, c.txs.clone(), *b, build_pbc_het(&c.graph(), &c.txs, c.cores, *b).unwrap()));

    let (mut total, mut half, mut worst) = (0, 0, 1.0f64);
    for (k, (c, txs, budget, model)) in hom.chain(het).enumerate() {
        let graph = c.graph();
        let gh = schedule_pbc(&txs, c.cores, budget, &score(&graph, &txs), &graph);
        validate(&txs, &gh.schedule, &graph, Requirement::Budget(budget)).map_err(|e| e.to_string())?;
        let gh_reward = gh.reward(&txs);
        let (status, value, _) = solve(&model);
        if status != SolveStatus::Optimal {
            return Err(format!("instance {k}: solver {status:?}"));
        }
        let opt = value.unwrap() as u128;
        let bound = upper_bound(&txs, c.cores, budget);
        if !(gh_reward <= opt && opt <= bound) {
            return Err(format!("instance {k}: GH {gh_reward}, OPT {opt}, bound {bound}"));
        }
        total += 1;
        half += usize::from(2 * gh_reward >= opt);
        if opt > 0 {
            worst = worst.min(gh_reward as f64 / opt as f64);
        }
    }
    let share = half as f64 / total as f64;
    if share < 0.95 {
        return Err(format!("GH >= OPT/2 on only {:.1}% of {total}", 100.0 * share));
    }
    Ok(format!(
        "GH <= OPT <= bound on {total} instances; GH >= OPT/2 on {:.1}%; worst GH/OPT {worst:.3}",
        100.0 * share
    ))
}

fn c6_fuzz() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut schedules = 0;
    for k in 0..10_000 {
        let n = rng.random_range(1..=200);
        let homogeneous = rng.random_bool(0.3);
        let spec = SynthSpec::Random {
            n,
            key_universe: rng.random_range(1..=2 * n as u64),
            access_size: rng.random_range(1..=8),
            gas_min: 1,
            gas_max: if homogeneous { 1 } else { rng.random_range(1..=20) },
            tip_min: 0,
            tip_max: rng.random_range(0..=10),
        };
        let w = synth(&spec, k);
        let txs = w.txs();
        let p = rng.random_range(1..=8);
        let budget = rng.random_range(1..=w.total_work().max(1));
        let graph = build_conflict_graph(txs);
        let dag = graph.to_dag();
        let fail = |what: &str, e: blocksched::model::ScheduleViolation| {
            format!("workload {k} (n={n}, p={p}): {what}: {e}")
        };
        validate(txs, &run_obs(&w, p), &graph, Requirement::Ordered(&dag)).map_err(|e| fail("GH", e))?;
        for mode in [SolDispatch::HeadOfLine, SolDispatch::SkipBlocked] {
            let sol = schedule_sol_with(txs, p, &graph, mode);
            validate(txs, &sol, &graph, Requirement::Ordered(&dag)).map_err(|e| fail("Sol", e))?;
        }
        let gh = run_pbc(&w, p, budget);
        validate(txs, &gh.schedule, &graph, Requirement::Budget(budget)).map_err(|e| fail("PBC GH", e))?;
        let rg = schedule_rg(txs, p, budget, &graph);
        validate(txs, &rg.schedule, &graph, Requirement::Budget(budget)).map_err(|e| fail("RG", e))?;
        schedules += 5;
    }
    Ok(format!("10000 workloads, {schedules} schedules valid"))
}

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn c7_determinism() -> Verdict {
    let records = ingest(fixture("sparse_2000.jsonl.gz")).map_err(|e| e.to_string())?;
    let fingerprint = || -> Result<String, String> {
        let mut out = String::new();
        let blocks = slice_obs(&records, WorkloadKind::Heterogeneous, 4, Limit::Gas(15_000_000), 3)
            .map_err(|e| e.to_string())?;
        let pools = slice_pbc(&records, WorkloadKind::Heterogeneous, 4, Limit::Gas(3_000_000), 2, 3)
            .map_err(|e| e.to_string())?;
        for b in blocks.iter().chain(&pools) {
            let graph = build_conflict_graph(b.txs());
            out += &format!("{b:?}");
            out += &serde_json::to_string(&run_obs(b, 4)).unwrap();
            out += &serde_json::to_string(&schedule_sol(b.txs(), 4, &graph)).unwrap();
            out += &format!("{:?}", run_pbc(b, 4, 3_000_000));
            out += &format!("{:?}", schedule_rg(b.txs(), 4, 3_000_000, &graph));
        }
        Ok(out)
    };
    let experiment = || -> Result<String, String> {
        let config = ExperimentConfig {
            problem: Problem::Pbc,
            kind: WorkloadKind::Heterogeneous,
            source: Source::Trace { path: fixture("sparse_2000.jsonl.gz") },
            cores: vec![2, 4, 8],
            limits: vec![1_000_000, 2_000_000],
            pool_factors: vec![1, 2],
            methods: vec![Method::Gh, Method::Rg, Method::UpperBound],
            repetitions: 3,
            sol_dispatch: SolDispatch::HeadOfLine,
            exact: Default::default(),
            output: Output::default(),
        };
        let table = run_experiment(&config).map_err(|e| e.to_string())?;
        Ok(render_csv(&table).map_err(|e| e.to_string())? + &render_text(&table))
    };
    let in_pool = |threads: usize, f: &(dyn Fn() -> Result<String, String> + Sync)| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(f)
    };
    let a = fingerprint()?;
    if a != fingerprint()? {
        return Err("heuristic or slicer output differs between two runs".into());
    }
    let one = in_pool(1, &experiment)?;
    let many = in_pool(8, &experiment)?;
    if one != many || one != experiment()? {
        return Err("experiment output depends on thread count".into());
    }
    Ok(format!(
        "slicers and heuristics byte-identical across runs; experiment tables identical with 1 and 8 threads ({} bytes)",
        one.len()
    ))
}

fn obs_hom_shape(n: usize, r: usize, e: usize) -> ModelShape {
    ModelShape { binaries: n * r + r, integers: 0, continuous: 0, constraints: n + r + e * r + (r - 1) }
}

fn obs_het_shape(n: usize, p: usize, e: usize, non: usize) -> ModelShape {
    ModelShape {
        binaries: n * p + non * (p + 2),
        integers: 2 * n + 1,
        continuous: 0,
        constraints: 4 * n + e + 3 * non * p + 3 * non,
    }
}

fn pbc_hom_shape(n: usize, r: usize, e: usize) -> ModelShape {
    ModelShape { binaries: n * r, integers: 0, continuous: 0, constraints: n + r + e * r }
}

fn pbc_het_shape(n: usize, p: usize, e: usize, non: usize) -> ModelShape {
    ModelShape {
        binaries: n + n * p + e + non * (p + 2),
        integers: 2 * n,
        continuous: 0,
        constraints: 4 * n + 2 * e + 3 * non * p + 3 * non,
    }
}

fn c8_model_shape() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut points = 0;
    for _ in 0..20 {
        let n = rng.random_range(1..=30);
        let density: f64 = rng.random_range(0.0..=1.0);
        let txs: Vec<Transaction> = (0..n)
            .map(|i| Transaction::new(i, rng.random_range(1..=9), rng.random_range(0..=9), [], []).unwrap())
            .collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(density) {
                    edges.push((i, j));
                }
            }
        }
        let e = edges.len();
        let non = n * (n - 1) / 2 - e;
        let r = rng.random_range(1..=n);
        let p = rng.random_range(1..=8);
        let dag = DependencyDag::from_edges(n, edges.iter().copied());
        let graph = ConflictGraph::from_edges(n, edges.iter().copied());
        let weights: Vec<u128> = txs.iter().map(Transaction::reward).collect();
        let cases = [
            ("obs-hom", build_obs_hom(&dag, p, r as u64), obs_hom_shape(n, r, e)),
            (
                "obs-het",
                build_obs_het(&dag, &txs, p, default_big_m(&txs)).unwrap(),
                obs_het_shape(n, p, e, non),
            ),
            ("pbc-hom", build_pbc_hom(&graph, &weights, p, r as u64).unwrap(), pbc_hom_shape(n, r, e)),
            ("pbc-het", build_pbc_het(&graph, &txs, p, 20).unwrap(), pbc_het_shape(n, p, e, non)),
        ];
        for (label, model, expected) in cases {
            let shape = model.shape();
            if shape != expected {
                return Err(format!("{label} n={n} R={r} p={p} |E|={e}: {shape:?} != {expected:?}"));
            }
            let parsed = parse_lp(&to_lp_string(&model)).map_err(|e| e.to_string())?;
            if parsed.shape() != shape {
                return Err(format!("{label} n={n}: LP round trip gives {:?}", parsed.shape()));
            }
            points += 1;
        }
    }
    Ok(format!("{points} builder outputs match closed forms and survive LP round trip"))
}

fn c9_speed() -> Verdict {
    let dense = synth(&SynthSpec::SingleHotKey { n: 2000, t: 21_000, hot_percent: 100 }, 0);
    let records = ingest(fixture("sparse_2000.jsonl.gz")).map_err(|e| e.to_string())?;
    let sparse = records_to_workload(&records, WorkloadKind::Heterogeneous).map_err(|e| e.to_string())?;
    let max_keys = sparse.txs().iter().map(|t| t.reads().len() + t.writes().len()).max().unwrap_or(0);
    if sparse.len() != 2000 || max_keys > 10 {
        return Err(format!("sparse fixture has {} txs, up to {max_keys} keys", sparse.len()));
    }
    let time = |w: &Workload| {
        let start = Instant::now();
        let obs = run_obs(w, 8);
        let obs_time = start.elapsed();
        let start = Instant::now();
        let pbc = run_pbc(w, 8, w.total_work() / 16);
        let pbc_time = start.elapsed();
        std::hint::black_box((obs, pbc));
        (obs_time, pbc_time)
    };
    let (dense_obs, dense_pbc) = time(&dense);
    let (sparse_obs, sparse_pbc) = time(&sparse);
    let summary = format!(
        "dense n=2000: OBS {dense_obs:.2?}, PBC {dense_pbc:.2?} (limit 5s); sparse n=2000: OBS {sparse_obs:.2?}, PBC {sparse_pbc:.2?} (limit 0.5s)"
    );
    let five = Duration::from_secs(5);
    let half = Duration::from_millis(500);
    if dense_obs < five && dense_pbc < five && sparse_obs < half && sparse_pbc < half {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn main() {
    let started = Instant::now();
    let inst = instances();
    let criteria: [(&str, &dyn Fn() -> Verdict); 9] = [
        ("oracle equivalence", &|| c1_oracle(&inst)),
        ("approximation bound", &|| c2_approximation(&inst)),
        ("table structure", &c3_table_structure),
        ("stress reproduction", &c4_stress),
        ("bound chain", &|| c5_bound_chain(&inst)),
        ("validity fuzzing", &c6_fuzz),
        ("determinism", &c7_determinism),
        ("model shape", &c8_model_shape),
        ("heuristic speed", &c9_speed),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", k + 1);
            }
        }
    }
    println!("{}/9 criteria passed in {:.1?}", 9 - failed, started.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
