use std::path::PathBuf;

use asymlab_cli::config::{Command, ExperimentConfig, Format};
use clap::Parser;

/// Asymptotic limits, similarity tests, weighted shifts and constructions
/// of contractions with a prescribed asymptotic limit.
#[derive(Debug, Parser)]
#[command(name = "asymlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON input: a matrix, weight sequence, shift sum or target spectrum.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "kernel-tol")]
    kernel_tol: Option<f64>,
    #[arg(long = "eig-tol")]
    eig_tol: Option<f64>,
    /// Power budget N.
    #[arg(long = "power-budget")]
    power_budget: Option<u64>,
    /// Window W (levels −W..W for `construct`, truncation for `shift`).
    #[arg(long)]
    window: Option<usize>,
    /// Per-chain dimension d for infinite multiplicities.
    #[arg(long = "level-dim")]
    level_dim: Option<usize>,
    /// Largest n in the convergence table (horizon for `shift`).
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// acceptance, shift-crossval or constructor.
    #[arg(long)]
    suite: Option<String>,
    /// Include A, U and T in `construct` reports.
    #[arg(long)]
    emit_matrices: bool,
}

fn main() {
    let cli = Cli::parse();
    let mut config = ExperimentConfig::new(cli.command);
    config.input = cli.input;
    config.output = cli.output;
    config.format = cli.format;
    config.tol = cli.tol;
    config.kernel_tol = cli.kernel_tol;
    config.eig_tol = cli.eig_tol;
    config.power_budget = cli.power_budget;
    config.window = cli.window;
    config.level_dim = cli.level_dim;
    config.n_max = cli.n_max;
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    config.suite = cli.suite;
    config.emit_matrices = cli.emit_matrices;
    std::process::exit(asymlab_cli::execute(&config));
}
