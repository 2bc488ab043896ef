//! `innokit` command line.

mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use innokit::causal::{self, CausalOptions, ContingencyTable};
use innokit::continuous::{self, ConditionalModel, ShapingCdf};
use innokit::ikea;
use innokit::lossy::{self, MarkovSpec};
use innokit::mec::{self, Coupling, MarginalSet};
use innokit::{Entropy, Execution};

use config::{OutputFormat, Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "innokit",
    version,
    about = "Innovation representations, minimum entropy coupling and entropic causality"
)]
struct Cli {
    /// JSON file with tolerance, seed, work_limit, output_format, execution.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true, env = "INNOKIT_WORK_LIMIT")]
    work_limit: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long, global = true, value_enum)]
    execution: Option<ExecutionArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExecutionArg {
    Sequential,
    Parallel,
}

#[derive(Subcommand)]
enum Command {
    /// Memoryless innovation of a continuous or mixed process.
    #[command(subcommand)]
    Continuous(ContinuousCmd),
    /// Lossy binary innovation.
    #[command(subcommand)]
    Lossy(LossyCmd),
    /// Lossless discrete innovation (minimum entropy coupling).
    Mec(MecArgs),
    /// Causal direction from paired categorical samples.
    Causal(CausalArgs),
    /// Equal-column shelf partition of a coupling.
    Ikea(IkeaArgs),
}

#[derive(Subcommand)]
enum ContinuousCmd {
    /// Map a sample path to its innovation sequence.
    Innovate(ContinuousArgs),
    /// Invert `innovate`, using the recorded theta column.
    Recover(ContinuousArgs),
}

#[derive(Args)]
struct ContinuousArgs {
    /// Conditional model, or a single shaping CDF for an i.i.d. process.
    #[arg(long)]
    model: PathBuf,
    /// Target law of the innovations (must be atomless).
    #[arg(long)]
    target: Option<PathBuf>,
    /// CSV input; standard input when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum LossyCmd {
    /// Maximal mutual information channel between Ber(alpha) and Ber(beta).
    Binary {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
    },
    /// First-order binary Markov source.
    Markov1 {
        #[arg(long)]
        alpha1: f64,
        #[arg(long)]
        alpha2: f64,
        #[arg(long, conflicts_with = "stationary", required_unless_present = "stationary")]
        gamma: Option<f64>,
        #[arg(long)]
        stationary: bool,
    },
    /// Higher-order binary Markov source from a JSON spec {alphas, gammas}.
    MarkovR {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MecMode {
    Greedy,
    Exact,
    Bound,
}

#[derive(Args)]
struct MecArgs {
    #[arg(value_enum)]
    mode: MecMode,
    /// JSON list of pmfs.
    #[arg(long)]
    marginals: PathBuf,
    /// Output alphabet size for the exact search.
    #[arg(long = "B", short = 'B', alias = "output-size")]
    output_size: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Greedy,
    Exact,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatisticArg {
    EntropyOfE,
    EntropyPlusCause,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothingArg {
    None,
    AddOne,
}

#[derive(Args)]
struct CausalArgs {
    /// Two-column CSV with a header row; standard input when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "greedy")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "entropy-of-e")]
    statistic: StatisticArg,
    #[arg(long, value_enum, default_value = "none")]
    smoothing: SmoothingArg,
}

#[derive(Args)]
struct IkeaArgs {
    /// JSON list of customer pmfs.
    #[arg(long)]
    customers: PathBuf,
    #[arg(long)]
    columns: usize,
    #[arg(long, conflicts_with = "epsilon")]
    shelves: Option<usize>,
    /// Residue target for the smallest shelf count.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ModelFile {
    Model(ConditionalModel),
    Cdf(ShapingCdf),
}

impl ModelFile {
    fn into_model(self) -> ConditionalModel {
        match self {
            ModelFile::Model(m) => m,
            ModelFile::Cdf(cdf) => ConditionalModel::Iid { cdf },
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let infeasible = e.chain().any(|c| c.downcast_ref::<innokit::Error>().is_some_and(|e| e.is_infeasible()));
            ExitCode::from(if infeasible { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let overrides = Overrides {
        tolerance: cli.tolerance,
        seed: cli.seed,
        work_limit: cli.work_limit,
        output_format: cli.format,
        execution: cli.execution.map(|e| match e {
            ExecutionArg::Sequential => Execution::Sequential,
            ExecutionArg::Parallel => Execution::Parallel,
        }),
    };
    let cfg = RunConfig::load(cli.config.as_deref(), overrides)?;
    log::info!("run config: {cfg:?}");
    match cli.command {
        Command::Continuous(cmd) => run_continuous(cmd, &cfg),
        Command::Lossy(cmd) => run_lossy(cmd, &cfg),
        Command::Mec(args) => run_mec(args, &cfg),
        Command::Causal(args) => run_causal(args, &cfg),
        Command::Ikea(args) => run_ikea(args, &cfg),
    }
}

fn json_only(cfg: &RunConfig, what: &str) -> Result<()> {
    if cfg.output_format == OutputFormat::Csv {
        bail!("{what} output is only available as JSON");
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn run_continuous(cmd: ContinuousCmd, cfg: &RunConfig) -> Result<()> {
    let (args, innovating) = match cmd {
        ContinuousCmd::Innovate(a) => (a, true),
        ContinuousCmd::Recover(a) => (a, false),
    };
    let model = io::read_json::<ModelFile>(&args.model)?.into_model();
    let target = match &args.target {
        Some(p) => io::read_json::<ShapingCdf>(p)?,
        None => ShapingCdf::standard_uniform(),
    };
    let rows = io::read_numeric_csv(io::open_input(args.input.as_deref())?)?;
    let first = |row: &Vec<Option<f64>>, k: usize| -> Result<f64> {
        row.first().copied().flatten().with_context(|| format!("row {}: missing value", k + 1))
    };
    if innovating {
        let xs = rows.iter().enumerate().map(|(k, r)| first(r, k)).collect::<Result<Vec<_>>>()?;
        let out = continuous::innovate(&xs, &model, &target, cfg.rng_seed())?;
        let comments = vec![format!("seed={}", cfg.seed)];
        if out.has_atoms() {
            let rows: Vec<Vec<String>> =
                out.ys.iter().zip(&out.thetas).map(|(y, t)| vec![fmt(*y), t.map(fmt).unwrap_or_default()]).collect();
            io::write_csv(&comments, &["y", "theta"], &rows)
        } else {
            let rows: Vec<Vec<String>> = out.ys.iter().map(|y| vec![fmt(*y)]).collect();
            io::write_csv(&comments, &["y"], &rows)
        }
    } else {
        let ys = rows.iter().enumerate().map(|(k, r)| first(r, k)).collect::<Result<Vec<_>>>()?;
        let thetas: Vec<Option<f64>> = rows.iter().map(|r| r.get(1).copied().flatten()).collect();
        let xs = continuous::recover(&ys, &model, &target, &thetas)?;
        let rows: Vec<Vec<String>> = xs.iter().map(|x| vec![fmt(*x)]).collect();
        io::write_csv(&[], &["x"], &rows)
    }
}

#[derive(Serialize)]
struct MarkovReport {
    beta_opt: f64,
    mi: Entropy,
    gamma: Vec<f64>,
    /// Per-history joint of `(X_k, Y_k)` for the chosen beta, in folded labels.
    channel: Vec<[[f64; 2]; 2]>,
    candidates: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stationary_rule: Option<f64>,
}

fn run_lossy(cmd: LossyCmd, cfg: &RunConfig) -> Result<()> {
    json_only(cfg, "lossy")?;
    match cmd {
        LossyCmd::Binary { alpha, beta } => io::print_json(&lossy::max_mi_binary(alpha, beta)?),
        LossyCmd::Markov1 { alpha1, alpha2, gamma, stationary } => {
            let gamma = match gamma {
                Some(g) => g,
                None => lossy::stationary_gamma(alpha1, alpha2)?,
            };
            let spec = MarkovSpec::first_order(alpha1, alpha2, gamma)?;
            let best = lossy::markov1_optimal_beta(alpha1, alpha2, gamma)?;
            let stationary_rule = if stationary { Some(lossy::stationary_optimal_beta(alpha1, alpha2)?) } else { None };
            io::print_json(&MarkovReport {
                channel: spec.joints(best.beta_opt),
                beta_opt: best.beta_opt,
                mi: best.mi,
                gamma: spec.gammas.clone(),
                candidates: best.candidates,
                stationary_rule,
            })
        }
        LossyCmd::MarkovR { spec } => {
            let spec: MarkovSpec = io::read_json(&spec)?;
            let best = lossy::markov_r_optimal_beta(&spec)?;
            io::print_json(&MarkovReport {
                channel: spec.joints(best.beta_opt),
                beta_opt: best.beta_opt,
                mi: best.mi,
                gamma: spec.gammas.clone(),
                candidates: best.candidates,
                stationary_rule: None,
            })
        }
    }
}

fn coupling_rows(c: &Coupling) -> Vec<Vec<String>> {
    c.cells()
        .iter()
        .enumerate()
        .map(|(b, cell)| {
            let mut row = vec![b.to_string(), fmt(cell.mass)];
            row.extend(cell.symbols.iter().map(|s| s.to_string()));
            row
        })
        .collect()
}

fn coupling_header(r: usize) -> Vec<String> {
    let mut h = vec!["symbol".to_string(), "mass".to_string()];
    h.extend((0..r).map(|i| format!("source_{i}")));
    h
}

fn emit_coupling(c: &Coupling, set: &MarginalSet, cfg: &RunConfig) -> Result<()> {
    match cfg.output_format {
        OutputFormat::Json => io::print_json(&c.report()?),
        OutputFormat::Csv => {
            let header = coupling_header(set.num_sources());
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            io::write_csv(&[format!("entropy={}", c.entropy().bits())], &header, &coupling_rows(c))
        }
    }
}

#[derive(Serialize)]
struct BoundReport {
    lower_bound: Entropy,
    bounds: mec::BoxBounds,
    minimizer: innokit::Pmf,
}

fn run_mec(args: MecArgs, cfg: &RunConfig) -> Result<()> {
    let set: MarginalSet = io::read_json(&args.marginals)?;
    let search = cfg.search();
    match args.mode {
        MecMode::Greedy => emit_coupling(&mec::greedy_mec_with_tolerance(&set, cfg.tolerance)?, &set, cfg),
        MecMode::Exact => {
            let b = args.output_size.unwrap_or_else(|| set.min_output_cardinality());
            emit_coupling(&mec::exhaustive_mec(&set, b, &search)?, &set, cfg)
        }
        MecMode::Bound => {
            json_only(cfg, "bound")?;
            let b = args.output_size.unwrap_or_else(|| set.min_output_cardinality());
            let bounds = mec::beta_bounds(&set, b, &search)?;
            let minimizer = mec::min_entropy_box(&bounds)?;
            io::print_json(&BoundReport { lower_bound: minimizer.entropy(), bounds, minimizer })
        }
    }
}

fn run_causal(args: CausalArgs, cfg: &RunConfig) -> Result<()> {
    json_only(cfg, "causal")?;
    let pairs = io::read_pairs(io::open_input(args.input.as_deref())?)?;
    let table = ContingencyTable::from_pairs(pairs)?;
    let options = CausalOptions {
        method: match args.method {
            MethodArg::Greedy => causal::Method::Greedy,
            MethodArg::Exact => causal::Method::Exact,
            MethodArg::Auto => causal::Method::Auto,
        },
        statistic: match args.statistic {
            StatisticArg::EntropyOfE => causal::Statistic::EntropyOfE,
            StatisticArg::EntropyPlusCause => causal::Statistic::EntropyPlusCause,
        },
        smoothing: match args.smoothing {
            SmoothingArg::None => causal::Smoothing::None,
            SmoothingArg::AddOne => causal::Smoothing::AddOne,
        },
        search: cfg.search(),
        ..CausalOptions::default()
    };
    io::print_json(&causal::infer_direction(&table, &options)?)
}

fn run_ikea(args: IkeaArgs, cfg: &RunConfig) -> Result<()> {
    let set: MarginalSet = io::read_json(&args.customers)?;
    let search = cfg.search();
    let plan = match args.shelves {
        Some(n) => ikea::best_partition(&set, args.columns, n, &search)?,
        None => ikea::min_shelves(&set, args.columns, args.epsilon.unwrap_or(cfg.tolerance), &search)?,
    };
    match cfg.output_format {
        OutputFormat::Json => io::print_json(&plan),
        OutputFormat::Csv => {
            let mut header = coupling_header(set.num_sources());
            header.insert(2, "column".into());
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = coupling_rows(&plan.coupling)
                .into_iter()
                .zip(&plan.assignment)
                .map(|(mut row, col)| {
                    row.insert(2, col.to_string());
                    row
                })
                .collect();
            io::write_csv(&[format!("residue={}", plan.residue)], &header, &rows)
        }
    }
}
