//! `paretoc`: singular and Pareto critical sets from the command line.

mod commands;
mod grid;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use grid::GridSpec;

#[derive(Debug, Parser)]
#[command(name = "paretoc", version, about = "Simplicial continuation of Pareto critical sets")]
struct Cli {
    /// Worker threads for the parallel stages (default: available parallelism).
    #[arg(long, global = true, env = "PARETOC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze one problem on one node set and write the complex.
    Run(RunArgs),
    /// Refine the node set around the critical set repeatedly.
    Iterate(IterateArgs),
    /// Hausdorff distance between two complex files.
    Distance(DistanceArgs),
    /// Export CSV tables for plotting.
    PlotData(PlotArgs),
    /// Print the registered problems.
    ListProblems,
    /// Compare analytic derivatives with central differences.
    CheckDerivatives(CheckArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Registered problem name (see `list-problems`).
    #[arg(long)]
    problem: String,
    /// Node set: `NxM[xK]`, `random:N[:seed=S]` or `subdiv:K`.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<GridSpec>,
    /// Icosphere subdivision level, shorthand for `--grid subdiv:K`.
    #[arg(long, conflicts_with = "grid")]
    subdiv: Option<usize>,
    /// Seed for random node sets that do not name one.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 1 stops after the multipliers, 2 also classifies stability.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: Option<u8>,
    /// Use finite-difference Hessians even when analytic ones exist.
    #[arg(long)]
    fd_hessians: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Output file (default `<problem>.json`).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Polyline,
    Maximin,
}

#[derive(Debug, Args)]
struct IterateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "polyline")]
    scheme: SchemeArg,
    /// Refinement steps after the initial analysis.
    #[arg(long, default_value_t = 4)]
    iterations: usize,
    /// Nodes added per step at most.
    #[arg(long)]
    budget: Option<usize>,
    /// Stop once the largest minor magnitude on the refined set is below this.
    #[arg(long)]
    tau: Option<f64>,
    /// Complex file to measure every iteration against.
    #[arg(long, conflicts_with = "against_final")]
    reference: Option<PathBuf>,
    /// Measure every iteration against the last one.
    #[arg(long)]
    against_final: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrataArg {
    All,
    Critical,
    Stable,
}

#[derive(Debug, Args)]
struct DistanceArgs {
    a: PathBuf,
    b: PathBuf,
    /// Lattice subdivisions per simplex edge when sampling.
    #[arg(long, default_value_t = paretoc_core::metrics::DEFAULT_DENSITY)]
    density: usize,
    #[arg(long, value_enum, default_value = "all")]
    strata: StrataArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpaceArg {
    Input,
    Output,
    Both,
}

#[derive(Debug, Args)]
struct PlotArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    space: SpaceArg,
    /// Export only critical_stable simplices.
    #[arg(long)]
    stable_only: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Difference step as a fraction of the domain diagonal.
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    s.parse()
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
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
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Run(a) => commands::run(&a),
        Command::Iterate(a) => commands::iterate(&a),
        Command::Distance(a) => commands::distance(&a),
        Command::PlotData(a) => commands::plot_data(&a),
        Command::ListProblems => commands::list_problems(),
        Command::CheckDerivatives(a) => commands::check_problem_derivatives(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
