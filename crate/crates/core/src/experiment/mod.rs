//! Experiment grids: slice workloads per cell, run every requested method,
//! validate each schedule, and aggregate metrics into a result table.

mod config;
mod metrics;
mod report;

use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::conflict::build_conflict_graph;
use crate::exact::{
    build_obs_het, build_obs_hom, build_pbc_het, build_pbc_hom, default_big_m, solve_exact,
    upper_bound, ExactError, SolveOptions, SolveStatus,
};
use crate::model::{
    validate, ConflictGraph, DependencyDag, Limit, ObsParams, Params, PbcParams, Requirement,
    Schedule, ScheduleViolation, Workload, WorkloadKind,
};
use crate::obs::{preprocess, schedule_obs, schedule_sol_with};
use crate::pbc::{schedule_pbc, schedule_rg, score, Selection};
use crate::workload::{
    filter_homogeneous, ingest, slice_obs, slice_pbc, synth, synth_records, SynthSpec,
    TraceRecord, WorkloadError,
};

pub use config::{ExactSettings, ExperimentConfig, Method, Output, Problem, Source};
pub use metrics::{mean, percent_of_bound, Speedup};
pub use report::{render, render_csv, render_text, write_outputs, Format};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("{method} produced an invalid schedule: {violation}", method = method.as_str())]
    InvalidSchedule {
        method: Method,
        violation: ScheduleViolation,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One grid point. `pool_factor` is `None` for ordered blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cell {
    pub limit: u64,
    pub cores: usize,
    pub pool_factor: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Rounds,
    Makespan,
    Speedup,
    Reward,
    PercentOfBound,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Rounds => "rounds",
            Metric::Makespan => "makespan",
            Metric::Speedup => "speedup",
            Metric::Reward => "reward",
            Metric::PercentOfBound => "pct_of_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub cell: Cell,
    pub method: Method,
    pub metric: Metric,
    pub mean: f64,
    /// Workloads that contributed to the mean.
    pub n: usize,
    /// Some exact run stopped at its time limit; its incumbent is used.
    pub timeout: bool,
}

/// A method that produced no value in a cell, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub cell: Cell,
    pub method: Method,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub problem: Problem,
    pub kind: WorkloadKind,
    /// Sorted by cell, then method, then metric.
    pub rows: Vec<Row>,
    pub skipped: Vec<Skipped>,
}

impl ResultTable {
    pub fn get(&self, cell: Cell, method: Method, metric: Metric) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.cell == cell && r.method == method && r.metric == metric)
    }
}

/// Metric values of one method on one workload.
struct Measure {
    values: Vec<(Metric, f64)>,
    timed_out: bool,
}

/// Structures shared by every method on one workload.
struct Prepared<'a> {
    workload: &'a Workload,
    graph: ConflictGraph,
    dag: DependencyDag,
    cores: usize,
    /// Runtime budget for block construction.
    budget: u64,
    limit: Limit,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable, ExperimentError> {
    let problem = config.problem;
    let methods: Vec<Method> = {
        let mut m = config.methods.clone();
        m.sort_unstable();
        m.dedup();
        m
    };
    let records = match &config.source {
        Source::Trace { path } => {
            let records = ingest(path)?;
            match config.kind {
                WorkloadKind::Homogeneous => filter_homogeneous(&records),
                WorkloadKind::Heterogeneous => records,
            }
        }
        Source::Synth { spec, seed } => synth_records(spec, *seed),
        Source::Stress => Vec::new(),
    };

    let mut cells = Vec::new();
    for &limit in &config.limits {
        for &cores in &config.cores {
            match problem {
                Problem::Obs => cells.push(Cell { limit, cores, pool_factor: None }),
                Problem::Pbc => cells.extend(config.pool_factors.iter().map(|&x| Cell {
                    limit,
                    cores,
                    pool_factor: Some(x),
                })),
            }
        }
    }
    cells.sort_unstable();
    cells.dedup();

    let results: Vec<(Vec<Row>, Vec<Skipped>)> = cells
        .par_iter()
        .map(|&cell| {
            let workloads = cell_workloads(config, &records, cell)?;
            run_cell(config, &methods, cell, &workloads)
        })
        .collect::<Result<_, ExperimentError>>()?;

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (r, s) in results {
        rows.extend(r);
        skipped.extend(s);
    }
    Ok(ResultTable {
        problem,
        kind: config.kind,
        rows,
        skipped,
    })
}

fn limit_for(kind: WorkloadKind, value: u64) -> Limit {
    match kind {
        WorkloadKind::Homogeneous => Limit::Rounds(value),
        WorkloadKind::Heterogeneous => Limit::Gas(value),
    }
}

fn cell_workloads(
    config: &ExperimentConfig,
    records: &[TraceRecord],
    cell: Cell,
) -> Result<Vec<Workload>, ExperimentError> {
    let limit = limit_for(config.kind, cell.limit);
    let count = config.repetitions;
    Ok(match (&config.source, config.problem) {
        (Source::Stress, _) => {
            let spec = SynthSpec::Stress {
                cores: cell.cores,
                budget: cell.limit,
            };
            let params = match config.problem {
                Problem::Obs => Params::Obs(ObsParams {
                    cores: cell.cores,
                    limit: Some(limit),
                }),
                Problem::Pbc => Params::Pbc(PbcParams {
                    cores: cell.cores,
                    limit,
                    pool_factor: 1,
                }),
            };
            vec![synth(&spec, 0).with_params(params); count]
        }
        (_, Problem::Obs) => slice_obs(records, config.kind, cell.cores, limit, count)?,
        (_, Problem::Pbc) => {
            let x = cell.pool_factor.unwrap_or(1);
            slice_pbc(records, config.kind, cell.cores, limit, x, count)?
        }
    })
}

fn run_cell(
    config: &ExperimentConfig,
    methods: &[Method],
    cell: Cell,
    workloads: &[Workload],
) -> Result<(Vec<Row>, Vec<Skipped>), ExperimentError> {
    let limit = limit_for(config.kind, cell.limit);
    let prepared: Vec<Prepared> = workloads
        .iter()
        .map(|w| {
            let graph = build_conflict_graph(w.txs());
            let dag = graph.to_dag();
            Prepared {
                workload: w,
                graph,
                dag,
                cores: cell.cores,
                budget: limit.budget(w.unit_time().unwrap_or(1)),
                limit,
            }
        })
        .collect();

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &method in methods {
        if !method.applies_to(config.problem) {
            skipped.push(Skipped {
                cell,
                method,
                reason: format!("not a {} method", config.problem.as_str()),
            });
            continue;
        }
        let mut measures = Vec::new();
        let mut reasons = Vec::new();
        for prep in &prepared {
            match measure(config, method, prep)? {
                Ok(m) => measures.push(m),
                Err(reason) => reasons.push(reason),
            }
        }
        if measures.is_empty() {
            reasons.dedup();
            skipped.push(Skipped {
                cell,
                method,
                reason: reasons.join("; "),
            });
            continue;
        }
        let timeout = measures.iter().any(|m| m.timed_out);
        let mut metrics: Vec<Metric> = measures[0].values.iter().map(|&(k, _)| k).collect();
        metrics.sort_unstable();
        for metric in metrics {
            let values: Vec<f64> = measures
                .iter()
                .filter_map(|m| m.values.iter().find(|&&(k, _)| k == metric).map(|&(_, v)| v))
                .collect();
            rows.push(Row {
                cell,
                method,
                metric,
                mean: mean(&values),
                n: values.len(),
                timeout,
            });
        }
    }
    Ok((rows, skipped))
}

fn checked(
    method: Method,
    result: Result<(), ScheduleViolation>,
) -> Result<(), ExperimentError> {
    result.map_err(|violation| ExperimentError::InvalidSchedule { method, violation })
}

/// Runs one method on one workload. The outer error aborts the experiment;
/// the inner one skips this workload with a reason.
fn measure(
    config: &ExperimentConfig,
    method: Method,
    prep: &Prepared,
) -> Result<Result<Measure, String>, ExperimentError> {
    match config.problem {
        Problem::Obs => measure_obs(config, method, prep),
        Problem::Pbc => measure_pbc(config, method, prep),
    }
}

fn obs_values(prep: &Prepared, schedule: &Schedule) -> Vec<(Metric, f64)> {
    let span = schedule.makespan();
    let primary = match prep.workload.unit_time() {
        Some(t) => (Metric::Rounds, (span / t) as f64),
        None => (Metric::Makespan, span as f64),
    };
    let speedup = Speedup::new(prep.workload.total_work(), span);
    vec![primary, (Metric::Speedup, speedup.value())]
}

fn gh_obs(prep: &Prepared) -> Schedule {
    let txs = prep.workload.txs();
    schedule_obs(txs, prep.cores, &preprocess(&prep.dag, txs), &prep.dag)
}

fn measure_obs(
    config: &ExperimentConfig,
    method: Method,
    prep: &Prepared,
) -> Result<Result<Measure, String>, ExperimentError> {
    let txs = prep.workload.txs();
    let mut timed_out = false;
    let schedule = match method {
        Method::Gh => gh_obs(prep),
        Method::Sol => schedule_sol_with(txs, prep.cores, &prep.graph, config.sol_dispatch),
        Method::Exact => {
            if txs.len() > config.exact.max_n {
                return Ok(Err(too_large(txs.len(), config.exact.max_n)));
            }
            let model = match prep.workload.unit_time() {
                Some(t) => {
                    let rounds = gh_obs(prep).makespan() / t;
                    build_obs_hom(&prep.dag, prep.cores, rounds)
                }
                None => build_obs_het(&prep.dag, txs, prep.cores, default_big_m(txs))?,
            };
            let sol = solve_exact(&model, &exact_options(config))?;
            timed_out = !matches!(sol.status, SolveStatus::Optimal | SolveStatus::Infeasible);
            match sol.schedule {
                Some(s) => rescale(prep.workload, s),
                None => return Ok(Err(no_incumbent(sol.status))),
            }
        }
        Method::Rg | Method::UpperBound => unreachable!("filtered by applies_to"),
    };
    checked(method, validate(txs, &schedule, &prep.graph, Requirement::Ordered(&prep.dag)))?;
    Ok(Ok(Measure {
        values: obs_values(prep, &schedule),
        timed_out,
    }))
}

fn measure_pbc(
    config: &ExperimentConfig,
    method: Method,
    prep: &Prepared,
) -> Result<Result<Measure, String>, ExperimentError> {
    let txs = prep.workload.txs();
    let bound = upper_bound(txs, prep.cores, prep.budget);
    let mut timed_out = false;
    let selection = match method {
        Method::UpperBound => {
            return Ok(Ok(Measure {
                values: vec![(Metric::Reward, bound as f64)],
                timed_out: false,
            }))
        }
        Method::Gh => {
            let priorities = score(&prep.graph, txs);
            schedule_pbc(txs, prep.cores, prep.budget, &priorities, &prep.graph)
        }
        Method::Rg => schedule_rg(txs, prep.cores, prep.budget, &prep.graph),
        Method::Exact => {
            if txs.len() > config.exact.max_n {
                return Ok(Err(too_large(txs.len(), config.exact.max_n)));
            }
            let weights: Vec<u128> = txs.iter().map(|t| t.reward()).collect();
            let model = match (prep.workload.unit_time(), prep.limit) {
                (Some(_), Limit::Rounds(r)) => build_pbc_hom(&prep.graph, &weights, prep.cores, r)?,
                _ => build_pbc_het(&prep.graph, txs, prep.cores, prep.budget)?,
            };
            let sol = solve_exact(&model, &exact_options(config))?;
            timed_out = !matches!(sol.status, SolveStatus::Optimal | SolveStatus::Infeasible);
            let Some(schedule) = sol.schedule else {
                return Ok(Err(no_incumbent(sol.status)));
            };
            let schedule = rescale(prep.workload, schedule);
            Selection {
                selected: schedule.selected(),
                schedule,
            }
        }
        Method::Sol => unreachable!("filtered by applies_to"),
    };
    checked(
        method,
        validate(txs, &selection.schedule, &prep.graph, Requirement::Budget(prep.budget)),
    )?;
    let reward = selection.reward(txs);
    let speedup = Speedup::new(selection.work(txs), selection.schedule.makespan());
    Ok(Ok(Measure {
        values: vec![
            (Metric::Makespan, selection.schedule.makespan() as f64),
            (Metric::Speedup, speedup.value()),
            (Metric::Reward, reward as f64),
            (Metric::PercentOfBound, percent_of_bound(reward, bound)),
        ],
        timed_out,
    }))
}

fn exact_options(config: &ExperimentConfig) -> SolveOptions {
    SolveOptions::with_time_limit(Duration::from_secs_f64(config.exact.time_limit_secs))
}

fn too_large(n: usize, max: usize) -> String {
    format!("{n} transactions exceed the limit of {max}")
}

fn no_incumbent(status: SolveStatus) -> String {
    format!("exact stopped ({status:?}) without a feasible solution")
}

/// Round-based programs report unit slots; stretch them to the workload's
/// execution time.
fn rescale(workload: &Workload, schedule: Schedule) -> Schedule {
    match workload.unit_time() {
        Some(t) if t != 1 => schedule.scaled(t),
        _ => schedule,
    }
}
