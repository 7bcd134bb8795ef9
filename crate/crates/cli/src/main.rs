use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Kinodynamic tree planners and their benchmark harness.
#[derive(Parser, Debug)]
#[command(name = "kinoplan", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one planner once and write its metrics and solution.
    Plan(Scenario),
    /// Run seeded trials and write per-trial and aggregated curves.
    Bench(Scenario),
    /// Run trials for every (delta-s, delta-bn) pair of a grid.
    Sweep(SweepArgs),
    /// Compare nearest-neighbor structures against an exhaustive scan.
    Nnbench(NnArgs),
    /// Run one planner and write a cost grid over two state dimensions.
    Phase(PhaseArgs),
}

#[derive(Args, Debug, Clone)]
struct Scenario {
    /// System name (point2d, rigid3d, pendulum, cartpole, acrobot, quadrotor, airplane).
    #[arg(long)]
    system: Option<String>,
    /// Shipped environment name or path to an environment file.
    #[arg(long)]
    env: Option<String>,
    /// naive, rrt, rrt-bestnear, sst, sst-star or rrt-star.
    #[arg(long, default_value = "sst")]
    planner: String,
    #[arg(long)]
    delta_s: Option<f64>,
    #[arg(long)]
    delta_bn: Option<f64>,
    /// Maximum propagation duration in seconds.
    #[arg(long)]
    tprop: Option<f64>,
    /// Iteration budget per trial [default: 10000].
    #[arg(long, conflicts_with = "seconds")]
    iters: Option<u64>,
    /// Wall-clock budget per trial in seconds.
    #[arg(long)]
    seconds: Option<f64>,
    #[arg(long, default_value_t = 1)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Radius shrink factor for sst-star.
    #[arg(long, default_value_t = 0.9)]
    xi: f64,
    /// First sprint length for sst-star.
    #[arg(long, default_value_t = 1000)]
    n0: u64,
    /// Integration step override.
    #[arg(long)]
    dt: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    scenario: Scenario,
    /// Comma-separated delta-s values.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8,1.0")]
    ds_values: Vec<f64>,
    /// Comma-separated delta-bn values.
    #[arg(long, value_delimiter = ',', default_value = "1.0,1.2,1.4,1.6,1.8")]
    bn_values: Vec<f64>,
}

#[derive(Args, Debug)]
struct NnArgs {
    #[arg(long, default_value_t = 50_000)]
    points: usize,
    #[arg(long, default_value_t = 5_000)]
    queries: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Range-query radius [default: radius holding k points on average].
    #[arg(long)]
    radius: Option<f64>,
    /// graph, brute or both.
    #[arg(long, default_value = "both")]
    structure: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PhaseArgs {
    #[command(flatten)]
    scenario: Scenario,
    /// Two state dimensions, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    dims: Vec<usize>,
    /// Pixels per axis.
    #[arg(long, default_value_t = 100)]
    resolution: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(s) => commands::plan(&s),
        Command::Bench(s) => commands::bench(&s),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Nnbench(a) => commands::nnbench(&a),
        Command::Phase(a) => commands::phase(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
