//! Command-line harness for flag-gadget experiments.
//!
//! Subcommands: `rank` (score random candidates), `sweep` (single-flag
//! noise sweep), `pair-sweep` (nested-pair sweep), and `explain` (one
//! flag's propagation trace and detection report). Set `FLAGSIM_WORKERS`
//! to pin the worker-pool size.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use flagsim::experiment::{
    default_parameter_grid, explain_flag, rank_csv_string, rank_records, records_csv_string,
    resolve_circuit, run_pair_experiment, run_rank, run_single_flag_experiment, ExperimentConfig,
    ExperimentReport, DEFAULT_N_FLAGS, DEFAULT_N_PAIRS,
};
use flagsim::fault::{NoiseKind, NoiseModel};
use flagsim::gadget::synthesize;
use flagsim::pauli::PauliString;

#[derive(Parser)]
#[command(
    name = "flagsim",
    version,
    about = "Synthesize, rank, and empirically evaluate Pauli flag gadgets for error detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank random compatible flag candidates by quality score
    Rank(RankArgs),
    /// Sweep ranked single flags across a noise-parameter grid
    Sweep(SweepArgs),
    /// Sweep nested flag pairs across a noise-parameter grid
    PairSweep(PairSweepArgs),
    /// Report one flag's propagation trace, detected faults, and score
    Explain(ExplainArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Builtin circuit name (magic, zzzzz) or path to a circuit file
    #[arg(long)]
    circuit: String,
    /// Noise model: depolarizing, crosstalk, or overrotation
    #[arg(long, default_value = "depolarizing")]
    model: String,
    /// Override the quality penalty per unit of flag weight
    #[arg(long)]
    penalty: Option<f64>,
    /// Moment range START:END the gadget may span (default: the circuit's
    /// natural section)
    #[arg(long, value_parser = parse_section)]
    section: Option<(usize, usize)>,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path prefix; writes PREFIX.csv and PREFIX.json
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct GridArgs {
    /// Error probabilities for channel models (comma separated)
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// Overrotation angles in radians (comma separated)
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of random candidates to draw and rank
    #[arg(long, default_value_t = DEFAULT_N_FLAGS)]
    flags: usize,
    /// Score on the instrumented circuit instead of the penalty heuristic
    #[arg(long)]
    exact_scoring: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Number of random candidates to draw and rank
    #[arg(long, default_value_t = DEFAULT_N_FLAGS)]
    flags: usize,
    /// Score on the instrumented circuit instead of the penalty heuristic
    #[arg(long)]
    exact_scoring: bool,
}

#[derive(Args)]
struct PairSweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Number of nested pairs to draw
    #[arg(long, default_value_t = DEFAULT_N_PAIRS)]
    pairs: usize,
    /// Maximum support overlap within a pair (default: half the width)
    #[arg(long)]
    overlap: Option<usize>,
    /// Score on the instrumented circuit instead of the penalty heuristic
    #[arg(long)]
    exact_scoring: bool,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// The entangling Pauli operator, e.g. +ZZIII
    #[arg(long)]
    entangle: String,
}

fn parse_section(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("section `{s}` is not of the form START:END"))?;
    let start: usize = a
        .parse()
        .map_err(|e| format!("section start `{a}`: {e}"))?;
    let end: usize = b.parse().map_err(|e| format!("section end `{b}`: {e}"))?;
    Ok((start, end))
}

fn parse_model(name: &str, penalty: Option<f64>) -> Result<NoiseModel> {
    let mut m = match name {
        "depolarizing" => NoiseModel::depolarizing(1e-3),
        "crosstalk" => NoiseModel::crosstalk(1e-3),
        "overrotation" => NoiseModel::overrotation(1e-2),
        other => bail!(
            "unknown model `{other}` (expected depolarizing, crosstalk, or overrotation)"
        ),
    };
    m.penalty_override = penalty;
    Ok(m)
}

fn parameter_grid(model: &NoiseModel, grid: &GridArgs) -> Result<Vec<f64>> {
    match model.kind {
        NoiseKind::Depolarizing | NoiseKind::Crosstalk => {
            if !grid.epsilon.is_empty() {
                bail!("--epsilon applies only to the overrotation model; use --p");
            }
            Ok(if grid.p.is_empty() {
                default_parameter_grid(model.kind)
            } else {
                grid.p.clone()
            })
        }
        NoiseKind::Overrotation => {
            if !grid.p.is_empty() {
                bail!("--p applies only to channel models; use --epsilon");
            }
            Ok(if grid.epsilon.is_empty() {
                default_parameter_grid(model.kind)
            } else {
                grid.epsilon.clone()
            })
        }
    }
}

fn build_config(common: &CommonArgs, model: NoiseModel) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(&common.circuit, model);
    cfg.seed = common.seed;
    cfg.section = common.section;
    cfg.output = common.out.clone();
    cfg
}

fn cmd_rank(args: &RankArgs) -> Result<()> {
    let model = parse_model(&args.common.model, args.common.penalty)?;
    let mut cfg = build_config(&args.common, model);
    cfg.n_flags = args.flags;
    cfg.exact_scoring = args.exact_scoring;
    let outcome = run_rank(&cfg)?;
    let csv = rank_csv_string(&rank_records(&outcome))?;
    match &args.common.out {
        None => print!("{csv}"),
        Some(prefix) => {
            let path = PathBuf::from(format!("{prefix}.csv"));
            fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
            println!(
                "wrote {} ranked flags to {}",
                outcome.scores.len(),
                path.display()
            );
        }
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let model = parse_model(&args.common.model, args.common.penalty)?;
    let mut cfg = build_config(&args.common, model);
    cfg.n_flags = args.flags;
    cfg.exact_scoring = args.exact_scoring;
    cfg.parameter_grid = parameter_grid(&model, &args.grid)?;
    let report = run_single_flag_experiment(&cfg)?;
    finish_sweep(report)
}

fn cmd_pair_sweep(args: &PairSweepArgs) -> Result<()> {
    let model = parse_model(&args.common.model, args.common.penalty)?;
    let mut cfg = build_config(&args.common, model);
    cfg.n_pairs = args.pairs;
    cfg.overlap_threshold = args.overlap;
    cfg.exact_scoring = args.exact_scoring;
    cfg.parameter_grid = parameter_grid(&model, &args.grid)?;
    let report = run_pair_experiment(&cfg)?;
    finish_sweep(report)
}

fn finish_sweep(report: ExperimentReport) -> Result<()> {
    match (&report.csv_path, &report.summary_path) {
        (Some(csv), Some(json)) => {
            println!(
                "wrote {} records to {} (summary: {})",
                report.records.len(),
                csv.display(),
                json.display()
            );
        }
        _ => {
            print!("{}", records_csv_string(&report.records)?);
        }
    }
    Ok(())
}

fn cmd_explain(args: &ExplainArgs) -> Result<()> {
    let model = parse_model(&args.common.model, args.common.penalty)?;
    let cfg = build_config(&args.common, model);
    let (circuit, section) = resolve_circuit(&cfg)?;
    let pauli: PauliString = args
        .entangle
        .parse()
        .with_context(|| format!("parsing entangling operator `{}`", args.entangle))?;
    let flag = synthesize(&circuit, &pauli, section)?;
    let report = explain_flag(&circuit, &flag, &model)?;
    let text = serde_json::to_string_pretty(&report)?;
    match &args.common.out {
        None => println!("{text}"),
        Some(prefix) => {
            let path = PathBuf::from(format!("{prefix}.json"));
            fs::write(&path, format!("{text}\n"))
                .with_context(|| format!("writing {}", path.display()))?;
            println!("wrote explanation to {}", path.display());
        }
    }
    Ok(())
}

fn init_worker_pool() {
    if let Ok(v) = std::env::var("FLAGSIM_WORKERS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: could not size the worker pool: {e}");
                }
            }
            _ => eprintln!("warning: ignoring invalid FLAGSIM_WORKERS value `{v}`"),
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Rank(args) => cmd_rank(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::PairSweep(args) => cmd_pair_sweep(args),
        Command::Explain(args) => cmd_explain(args),
    }
}

fn main() {
    env_logger::init();
    init_worker_pool();
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
