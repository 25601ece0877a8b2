use std::fmt::Write as _;
use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use blocksched::exact::{
    build_obs_het, build_obs_hom, build_pbc_het, build_pbc_hom, default_big_m, solve_exact,
    to_lp_string, upper_bound, ExactModel, SolveOptions,
};
use blocksched::experiment::{render, write_outputs, Format};
use blocksched::obs::{schedule_sol_with, SolDispatch};
use blocksched::workload::{
    filter_homogeneous, ingest, records_to_workload, slice_obs, slice_pbc, synth_records,
    write_records, SynthSpec, TraceRecord,
};
use blocksched::{
    build_conflict_graph, run_experiment, run_obs, run_pbc, schedule_rg, validate,
    ExperimentConfig, Limit, Requirement, Schedule, Workload, WorkloadKind,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "blocksched", version, about = "Conflict-aware parallel transaction scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schedule an ordered block on p cores (minimum makespan).
    Obs {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = ObsMethod::Gh)]
        method: ObsMethod,
        /// Let Sol skip past blocked transactions instead of stalling.
        #[arg(long)]
        skip_blocked: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Build a block from a mempool within a runtime budget (maximum reward).
    Pbc {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = PbcMethod::Gh)]
        method: PbcMethod,
        /// Mempool size as a multiple of one block; slices the first pool.
        #[arg(short = 'X', long)]
        pool_factor: Option<u64>,
        #[command(flatten)]
        out: Out,
    },
    /// Solve the integer program of a small instance exactly.
    Exact {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        problem: ProblemArg,
        /// Seconds before the search stops with its incumbent.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[command(flatten)]
        out: Out,
    },
    /// Write the integer program of an instance in CPLEX LP format.
    ExportLp {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        problem: ProblemArg,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run an experiment grid described by a TOML config.
    Bench {
        config: PathBuf,
        /// Also print the table to stdout in this format.
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Write a synthetic trace file.
    Synth {
        /// Generator as JSON, e.g. '{"kind":"chain","n":10}'.
        spec: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// Trace file (one JSON record per line, optionally gzip).
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    trace: Option<PathBuf>,
    /// Synthetic generator as JSON instead of a trace.
    #[arg(long)]
    synth: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Workload kind; inferred from gas values when omitted. Homogeneous
    /// traces keep only plain transfers.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(short = 'p', long, default_value_t = 4)]
    cores: usize,
    /// Round limit R (homogeneous).
    #[arg(short = 'R', long, conflicts_with = "budget")]
    rounds: Option<u64>,
    /// Gas budget B (heterogeneous).
    #[arg(short = 'B', long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct Out {
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObsMethod {
    Gh,
    Sol,
}

#[derive(Clone, Copy, ValueEnum)]
enum PbcMethod {
    Gh,
    Rg,
    UpperBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Obs,
    Pbc,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Homogeneous,
    Heterogeneous,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Csv,
}

impl Input {
    fn records(&self) -> Result<(Vec<TraceRecord>, WorkloadKind)> {
        let records = match (&self.trace, &self.synth) {
            (Some(path), _) => ingest(path).with_context(|| format!("reading {}", path.display()))?,
            (None, Some(json)) => {
                let spec: SynthSpec = serde_json::from_str(json).context("parsing --synth")?;
                synth_records(&spec, self.seed)
            }
            (None, None) => bail!("either --trace or --synth is required"),
        };
        let kind = match self.kind {
            Some(KindArg::Homogeneous) => return Ok((filter_homogeneous(&records), WorkloadKind::Homogeneous)),
            Some(KindArg::Heterogeneous) => WorkloadKind::Heterogeneous,
            None if records.windows(2).all(|w| w[0].gas_used == w[1].gas_used) => {
                WorkloadKind::Homogeneous
            }
            None => WorkloadKind::Heterogeneous,
        };
        Ok((records, kind))
    }

    fn limit(&self) -> Option<Limit> {
        self.rounds.map(Limit::Rounds).or(self.budget.map(Limit::Gas))
    }

    fn check_cores(&self) -> Result<()> {
        if self.cores == 0 {
            bail!("--cores must be at least 1");
        }
        Ok(())
    }

    /// The whole input, or its first block when a limit is given.
    fn block(&self) -> Result<Workload> {
        self.check_cores()?;
        let (records, kind) = self.records()?;
        Ok(match self.limit() {
            Some(limit) => slice_obs(&records, kind, self.cores, limit, 1)?.remove(0),
            None => records_to_workload(&records, kind)?,
        })
    }

    /// The whole input, or its first pool when a factor is given.
    fn pool(&self, factor: Option<u64>) -> Result<(Workload, u64)> {
        self.check_cores()?;
        let (records, kind) = self.records()?;
        let Some(limit) = self.limit() else {
            bail!("block construction needs --rounds or --budget");
        };
        let pool = match factor {
            Some(x) => slice_pbc(&records, kind, self.cores, limit, x, 1)?.remove(0),
            None => records_to_workload(&records, kind)?,
        };
        let budget = limit.budget(pool.unit_time().unwrap_or(1));
        Ok((pool, budget))
    }
}

#[derive(Serialize)]
struct SlotOut {
    id: usize,
    core: usize,
    start: u64,
    end: u64,
}

#[derive(Serialize)]
struct RunOut {
    method: &'static str,
    transactions: usize,
    cores: usize,
    makespan: u64,
    speedup: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    reward: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper_bound: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<String>,
    elapsed_ms: f64,
    schedule: Vec<SlotOut>,
}

impl RunOut {
    fn new(method: &'static str, workload: &Workload, schedule: &Schedule, elapsed: Duration) -> Self {
        let work: u64 = schedule.entries().map(|(id, _)| workload.txs()[id].exec_time()).sum();
        RunOut {
            method,
            transactions: workload.len(),
            cores: schedule.cores(),
            makespan: schedule.makespan(),
            speedup: blocksched::experiment::Speedup::new(work, schedule.makespan()).to_string(),
            reward: None,
            upper_bound: None,
            status: None,
            elapsed_ms: elapsed.as_secs_f64() * 1e3,
            schedule: schedule
                .entries()
                .map(|(id, s)| SlotOut { id, core: s.core, start: s.start, end: s.end })
                .collect(),
        }
    }

    fn print(&self, format: FormatArg) -> Result<()> {
        let mut out = String::new();
        match format {
            FormatArg::Json => writeln!(out, "{}", serde_json::to_string_pretty(self)?)?,
            FormatArg::Text | FormatArg::Csv => {
                let sep = if format == FormatArg::Csv { "," } else { " " };
                if format == FormatArg::Text {
                    writeln!(out, "method {}", self.method)?;
                    if let Some(s) = &self.status {
                        writeln!(out, "status {s}")?;
                    }
                    writeln!(out, "transactions {}", self.transactions)?;
                    writeln!(out, "cores {}", self.cores)?;
                    writeln!(out, "makespan {}", self.makespan)?;
                    writeln!(out, "speedup {}", self.speedup)?;
                    if let Some(r) = &self.reward {
                        writeln!(out, "reward {r}")?;
                    }
                    if let Some(b) = &self.upper_bound {
                        writeln!(out, "upper_bound {b}")?;
                    }
                    writeln!(out, "elapsed_ms {:.3}", self.elapsed_ms)?;
                }
                writeln!(out, "{}", ["id", "core", "start", "end"].join(sep))?;
                for s in &self.schedule {
                    writeln!(out, "{}{sep}{}{sep}{}{sep}{}", s.id, s.core, s.start, s.end)?;
                }
            }
        }
        emit(&out)
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn build_model(input: &Input, problem: ProblemArg) -> Result<(Workload, ExactModel)> {
    Ok(match problem {
        ProblemArg::Obs => {
            let block = input.block()?;
            let txs = block.txs();
            let dag = build_conflict_graph(txs).to_dag();
            let model = match block.unit_time() {
                Some(t) => {
                    let rounds = match input.rounds {
                        Some(r) => r,
                        None => run_obs(&block, input.cores).makespan() / t,
                    };
                    build_obs_hom(&dag, input.cores, rounds)
                }
                None => build_obs_het(&dag, txs, input.cores, default_big_m(txs))?,
            };
            (block, model)
        }
        ProblemArg::Pbc => {
            let (pool, budget) = input.pool(None)?;
            let txs = pool.txs();
            let graph = build_conflict_graph(txs);
            let model = match (pool.unit_time(), input.limit()) {
                (Some(_), Some(Limit::Rounds(r))) => {
                    let weights: Vec<u128> = txs.iter().map(|t| t.reward()).collect();
                    build_pbc_hom(&graph, &weights, input.cores, r)?
                }
                _ => build_pbc_het(&graph, txs, input.cores, budget)?,
            };
            (pool, model)
        }
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Obs { input, method, skip_blocked, out } => {
            let block = input.block()?;
            let txs = block.txs();
            let start = Instant::now();
            let (name, schedule) = match method {
                ObsMethod::Gh => ("gh", run_obs(&block, input.cores)),
                ObsMethod::Sol => {
                    let graph = build_conflict_graph(txs);
                    let dispatch = if skip_blocked {
                        SolDispatch::SkipBlocked
                    } else {
                        SolDispatch::HeadOfLine
                    };
                    ("sol", schedule_sol_with(txs, input.cores, &graph, dispatch))
                }
            };
            let elapsed = start.elapsed();
            let graph = build_conflict_graph(txs);
            validate(txs, &schedule, &graph, Requirement::Ordered(&graph.to_dag()))?;
            RunOut::new(name, &block, &schedule, elapsed).print(out.format)
        }
        Command::Pbc { input, method, pool_factor, out } => {
            let (pool, budget) = input.pool(pool_factor)?;
            let txs = pool.txs();
            let bound = upper_bound(txs, input.cores, budget);
            if let PbcMethod::UpperBound = method {
                return match out.format {
                    FormatArg::Json => emit(&format!("{}\n", serde_json::json!({ "upper_bound": bound.to_string() }))),
                    _ => emit(&format!("upper_bound {bound}\n")),
                };
            }
            let start = Instant::now();
            let (name, selection) = match method {
                PbcMethod::Gh => ("gh", run_pbc(&pool, input.cores, budget)),
                _ => ("rg", schedule_rg(txs, input.cores, budget, &build_conflict_graph(txs))),
            };
            let elapsed = start.elapsed();
            let graph = build_conflict_graph(txs);
            validate(txs, &selection.schedule, &graph, Requirement::Budget(budget))?;
            let mut report = RunOut::new(name, &pool, &selection.schedule, elapsed);
            report.reward = Some(selection.reward(txs).to_string());
            report.upper_bound = Some(bound.to_string());
            report.print(out.format)
        }
        Command::Exact { input, problem, time_limit, out } => {
            if !(time_limit > 0.0 && time_limit.is_finite()) {
                bail!("--time-limit must be a positive number of seconds");
            }
            let (workload, model) = build_model(&input, problem)?;
            let start = Instant::now();
            let sol = solve_exact(&model, &SolveOptions::with_time_limit(Duration::from_secs_f64(time_limit)))?;
            let elapsed = start.elapsed();
            let status = format!("{:?}", sol.status).to_lowercase();
            match sol.schedule {
                Some(schedule) => {
                    let schedule = schedule.scaled(workload.unit_time().unwrap_or(1));
                    let mut report = RunOut::new("exact", &workload, &schedule, elapsed);
                    report.status = Some(status);
                    if let Some(obj) = sol.objective {
                        if matches!(problem, ProblemArg::Pbc) {
                            report.reward = Some(obj.to_string());
                        }
                    }
                    report.print(out.format)
                }
                None => match out.format {
                    FormatArg::Json => emit(&format!("{}\n", serde_json::json!({ "status": status }))),
                    _ => emit(&format!("status {status}\n")),
                },
            }
        }
        Command::ExportLp { input, problem, output } => {
            let (_, model) = build_model(&input, problem)?;
            let text = to_lp_string(&model);
            match output {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => emit(&text)?,
            }
            Ok(())
        }
        Command::Bench { config, format } => {
            let config = ExperimentConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            let table = run_experiment(&config)?;
            write_outputs(&table, &config.output)?;
            match format {
                FormatArg::Json => emit(&format!("{}\n", serde_json::to_string_pretty(&table)?)),
                FormatArg::Csv => emit(&render(&table, Format::Csv)?),
                FormatArg::Text => emit(&render(&table, Format::Text)?),
            }
        }
        Command::Synth { spec, seed, output } => {
            let spec: SynthSpec = serde_json::from_str(&spec).context("parsing generator spec")?;
            let records = synth_records(&spec, seed);
            match output {
                Some(path) => blocksched::workload::export_records(&records, &path)?,
                None => {
                    let mut buf = Vec::new();
                    write_records(&records, &mut buf)?;
                    emit(&String::from_utf8(buf)?)?;
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let message = format!("{err:#}");
            eprintln!("{}", serde_json::json!({ "error": message }));
            ExitCode::FAILURE
        }
    }
}
