//! Command-line driver: refine / evaluate / bootstrap / export-ilp / report.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ilprefine::ilp::{build_ilp, IlpOptions, IlpPreset};
use ilprefine::io::{load_graph, read_partition, write_partition};
use ilprefine::model::build_model;
use ilprefine::partition::Partition;
use ilprefine::refine::{
    bootstrap_partition, default_strategies, evaluate, refine, RefineConfig, RefineError,
};
use ilprefine::report::{append_record_jsonl, read_records_jsonl, report_performance};
use ilprefine::selection::{select, SelectionStrategy, StrategyKind};
use ilprefine::GraphF64;

#[derive(Parser)]
#[command(
    name = "ilprefine",
    version,
    about = "Improves balanced k-way graph partitions via an exact solver on a contracted model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Refine a partition; writes the improved partition and a JSON run record.
    Refine {
        /// Graph in METIS/Chaco format.
        graph: PathBuf,
        /// Partition file: one 0-indexed block id per line.
        partition: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// boundary | gain:<rho> | topvertices:<delta>; defaults to the
        /// tuned gain strategies for this k.
        #[arg(long)]
        strategy: Option<String>,
        /// Non-zero budget N; defaults to 10^6 (5*10^6 for k in {32,64}).
        #[arg(long)]
        nzlimit: Option<u64>,
        /// Solver time limit per model in seconds (0 = unlimited).
        #[arg(long = "time-limit", default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// RNG seed (the ILPREFINE_SEED environment variable overrides it).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// basic | basicsym | basicsymssol | bsssconst= | bsssconst<
        #[arg(long, default_value = "basicsymssol")]
        preset: String,
        /// Output partition file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append the run record to this JSON-lines file.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Validate a partition file: cut, block weights, balance verdicts.
    Evaluate {
        graph: PathBuf,
        partition: PathBuf,
        /// Block count; inferred from the file when omitted.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Produce a balanced partition by seeded greedy graph growing.
    Bootstrap {
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the binary program for a selection and write it as an LP file.
    #[command(name = "export-ilp")]
    ExportIlp {
        graph: PathBuf,
        partition: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        nzlimit: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "basicsymssol")]
        preset: String,
        #[arg(long)]
        out: PathBuf,
        /// Also dump the coarse model as <base>.graph and <base>.map.
        #[arg(long = "dump-model")]
        dump_model: Option<PathBuf>,
    },
    /// Aggregate run records (JSON lines) into a performance CSV.
    Report {
        records: PathBuf,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    /// Bad input data or parameters; exits with code 2.
    Validation(String),
    /// Unexpected failure (output I/O); exits with code 1.
    Other(String),
}

impl CliError {
    fn validation(e: impl std::fmt::Display) -> Self {
        CliError::Validation(e.to_string())
    }

    fn other(e: impl std::fmt::Display) -> Self {
        CliError::Other(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// `ILPREFINE_SEED` takes precedence over `--seed`.
fn effective_seed(cli_seed: u64) -> Result<u64, CliError> {
    match std::env::var("ILPREFINE_SEED") {
        Ok(value) => value
            .trim()
            .parse::<u64>()
            .map_err(|_| CliError::Validation(format!("ILPREFINE_SEED={value:?} is not a u64"))),
        Err(_) => Ok(cli_seed),
    }
}

fn load_inputs(
    graph: &Path,
    partition: &Path,
    k: usize,
    eps: f64,
) -> Result<(GraphF64, Partition<f64>), CliError> {
    if k < 2 {
        return Err(CliError::Validation("k must be at least 2".to_string()));
    }
    if eps < 0.0 {
        return Err(CliError::Validation(
            "imbalance must be non-negative".to_string(),
        ));
    }
    let g: GraphF64 = load_graph(graph).map_err(CliError::validation)?;
    let assignment = read_partition(partition, g.vertex_count()).map_err(CliError::validation)?;
    let p = Partition::new(&g, k, eps, assignment).map_err(CliError::validation)?;
    Ok((g, p))
}

fn parse_strategy(text: &str) -> Result<StrategyKind, CliError> {
    text.parse::<StrategyKind>().map_err(CliError::Validation)
}

fn parse_preset(text: &str) -> Result<IlpPreset, CliError> {
    text.parse::<IlpPreset>().map_err(CliError::Validation)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Refine {
            graph,
            partition,
            k,
            eps,
            strategy,
            nzlimit,
            time_limit,
            rounds,
            seed,
            preset,
            out,
            records,
        } => {
            if rounds == 0 {
                return Err(CliError::Validation(
                    "rounds must be at least 1".to_string(),
                ));
            }
            if time_limit < 0.0 {
                return Err(CliError::Validation(
                    "time limit must be non-negative".to_string(),
                ));
            }
            let (g, p) = load_inputs(&graph, &partition, k, eps)?;
            let strategy = strategy.as_deref().map(parse_strategy).transpose()?;
            let preset = parse_preset(&preset)?;
            let cfg = RefineConfig {
                k,
                epsilon: eps,
                strategy,
                ilp_options: IlpOptions::preset(preset),
                time_limit,
                rounds,
                seed: effective_seed(seed)?,
                nonzero_budget: nzlimit,
                instance_name: instance_name(&graph),
            };
            let (refined, record) = refine(&g, &p, &cfg).map_err(|e| match e {
                RefineError::UnbalancedInput { .. } => CliError::validation(e),
                RefineError::Ilp(_) => CliError::validation(e),
            })?;
            if let Some(out) = out {
                write_partition(refined.assignment(), &out).map_err(CliError::other)?;
            }
            if let Some(records) = records {
                append_record_jsonl(&records, &record).map_err(CliError::other)?;
            }
            let line = serde_json::to_string(&record).expect("record serializes");
            println!("{line}");
            Ok(())
        }
        Command::Evaluate {
            graph,
            partition,
            k,
        } => {
            let g: GraphF64 = load_graph(&graph).map_err(CliError::validation)?;
            let assignment =
                read_partition(&partition, g.vertex_count()).map_err(CliError::validation)?;
            let k = match k {
                Some(k) => k,
                None => assignment.iter().copied().max().map_or(1, |b| b + 1).max(2),
            };
            let p = Partition::new(&g, k, 0.0, assignment).map_err(CliError::validation)?;
            print!("instance={}\n{}", instance_name(&graph), evaluate(&g, &p));
            Ok(())
        }
        Command::Bootstrap {
            graph,
            k,
            eps,
            seed,
            out,
        } => {
            if k < 2 {
                return Err(CliError::Validation("k must be at least 2".to_string()));
            }
            if eps < 0.0 {
                return Err(CliError::Validation(
                    "imbalance must be non-negative".to_string(),
                ));
            }
            let g: GraphF64 = load_graph(&graph).map_err(CliError::validation)?;
            let p = bootstrap_partition(&g, k, eps, effective_seed(seed)?)
                .map_err(CliError::validation)?;
            write_partition(p.assignment(), &out).map_err(CliError::other)?;
            print!("instance={}\n{}", instance_name(&graph), evaluate(&g, &p));
            Ok(())
        }
        Command::ExportIlp {
            graph,
            partition,
            k,
            eps,
            strategy,
            nzlimit,
            seed,
            preset,
            out,
            dump_model,
        } => {
            let (g, p) = load_inputs(&graph, &partition, k, eps)?;
            let kind = match strategy {
                Some(text) => parse_strategy(&text)?,
                None => default_strategies(k)[0],
            };
            let preset = parse_preset(&preset)?;
            let budget = nzlimit.unwrap_or_else(|| ilprefine::default_nonzero_budget(k));
            let kept = select(
                &g,
                &p,
                SelectionStrategy {
                    kind,
                    nonzero_budget: budget,
                    seed: effective_seed(seed)?,
                },
            );
            let model = build_model(&g, &p, &kept.vertices);
            let inst =
                build_ilp(&model, &IlpOptions::preset(preset)).map_err(CliError::validation)?;
            inst.export_lp(&out).map_err(CliError::other)?;
            if let Some(base) = dump_model {
                let graph_path = base.with_extension("graph");
                let map_path = base.with_extension("map");
                model
                    .write_debug_dump(&graph_path, &map_path)
                    .map_err(CliError::other)?;
            }
            println!(
                "kept={} model_vertices={} model_edges={} variables={} constraints={} nonzeros={}",
                kept.vertices.len(),
                inst.num_model_vertices(),
                inst.edges().len(),
                inst.num_variables(),
                inst.num_constraints(),
                inst.num_nonzeros()
            );
            Ok(())
        }
        Command::Report { records, out } => {
            let records = read_records_jsonl(&records).map_err(CliError::validation)?;
            let csv_text = report_performance(&records);
            match out {
                Some(path) => std::fs::write(path, csv_text).map_err(CliError::other)?,
                None => print!("{csv_text}"),
            }
            Ok(())
        }
    }
}
