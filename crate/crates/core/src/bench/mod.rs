//! Trial harness: scenario configuration, metric collection, parameter
//! sweeps, the nearest-neighbor accuracy experiment and phase grids.

mod io;
mod nnacc;
mod phase;
mod sweep;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planners::{Planner, PlannerConfig, PlannerKind, PlannerTree};
use crate::systems::{builtin_environment, Environment, SystemModel};

pub use io::{read_csv, read_metrics, write_csv, write_metrics, TimingRow};
pub use nnacc::{nn_accuracy_experiment, NnAccuracy, NnProtocol};
pub use phase::{default_normalization, emit_phase_grid, EdgeRow, GridCell, PhaseGrid};
pub use sweep::{sweep_params, SweepCell, SweepTable};

/// When a trial stops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Budget {
    Iterations(u64),
    /// Wall-clock seconds spent in the planner loop.
    Seconds(f64),
}

impl Budget {
    fn validate(self) -> Result<()> {
        match self {
            Budget::Seconds(s) if !(s > 0.0) || !s.is_finite() => Err(Error::InvalidConfig(
                format!("time budget must be positive, got {s}"),
            )),
            _ => Ok(()),
        }
    }
}

/// Everything needed to run a batch of seeded trials.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    /// Expected system; checked against the environment when set.
    pub system: Option<String>,
    /// A shipped environment name, a system name, or a path to a file.
    pub environment: String,
    pub planner: PlannerKind,
    pub planner_config: PlannerConfig,
    pub budget: Budget,
    pub trials: u32,
    pub base_seed: u64,
    /// Integration step override.
    pub dt: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    /// Defaults for a shipped environment: its system's radii, one trial.
    pub fn new(environment: &str, planner: PlannerKind, budget: Budget) -> Result<Self> {
        let (system, _) = load_environment(environment)?;
        Ok(Self {
            system: None,
            environment: environment.to_string(),
            planner,
            planner_config: PlannerConfig::for_system(&system),
            budget,
            trials: 1,
            base_seed: 0,
            dt: None,
            out_dir: None,
        })
    }

    pub fn with_trials(mut self, trials: u32) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn with_radii(mut self, delta_s: f64, delta_bn: f64) -> Self {
        self.planner_config = self.planner_config.with_radii(delta_s, delta_bn);
        self
    }

    /// Loads the system and environment and checks every parameter.
    pub fn resolve(&self) -> Result<(SystemModel, Environment)> {
        let (mut system, env) = load_environment(&self.environment)?;
        if let Some(name) = &self.system {
            if name != system.name() {
                return Err(Error::InvalidConfig(format!(
                    "environment `{}` is for `{}`, not `{name}`",
                    env.name,
                    system.name()
                )));
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
            }
            system = system.with_dt(dt);
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("at least one trial is required".into()));
        }
        self.budget.validate()?;
        self.planner_config.validate(&system)?;
        if self.planner == PlannerKind::SstStar && self.planner_config.sststar.is_none() {
            return Err(Error::InvalidConfig("sst-star needs xi and n0".into()));
        }
        if self.planner == PlannerKind::RrtStar && system.name() != "point2d" {
            return Err(Error::InvalidConfig(
                "rrt-star only supports point2d".into(),
            ));
        }
        Ok((system, env))
    }

    pub fn trial_seed(&self, trial: u32) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

/// Resolves a shipped environment or system name, or reads a file.
pub fn load_environment(spec: &str) -> Result<(SystemModel, Environment)> {
    let path = Path::new(spec);
    if path.extension().is_some_and(|e| e == "toml") || path.is_file() {
        return Environment::load(path);
    }
    builtin_environment(spec)
}

/// One sample of a trial's progress.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub iteration: u64,
    #[serde(skip)]
    pub wall_seconds: f64,
    pub nodes: usize,
    pub active: usize,
    pub witnesses: usize,
    pub best_cost: Option<f64>,
    pub average_cost: f64,
}

/// When a trial first reached the goal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstSolution {
    pub iteration: u64,
    pub wall_seconds: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    /// Rows at iterations 1, 2, 4, ... and at the end.
    pub rows: Vec<MetricsRow>,
    pub first_solution: Option<FirstSolution>,
}

impl TrialRecord {
    pub fn last(&self) -> &MetricsRow {
        self.rows.last().expect("a trial always has a terminal row")
    }
}

fn sample(planner: &Planner<'_>, seed: u64, wall_seconds: f64) -> MetricsRow {
    let tree = planner.tree();
    MetricsRow {
        seed,
        iteration: planner.iterations(),
        wall_seconds,
        nodes: tree.len(),
        active: tree.active_count(),
        witnesses: tree.witnesses().len(),
        best_cost: tree.best_cost(),
        average_cost: tree.average_cost(),
    }
}

/// Runs trial number `trial` of the scenario.
pub fn run_trial(config: &ScenarioConfig, trial: u32) -> Result<TrialRecord> {
    let (system, env) = config.resolve()?;
    run_resolved(config, &system, &env, trial)
}

fn run_resolved(
    config: &ScenarioConfig,
    system: &SystemModel,
    env: &Environment,
    trial: u32,
) -> Result<TrialRecord> {
    run_trial_on(config, system, env, trial).map(|(record, _)| record)
}

/// Like [`run_trial`] on an already resolved scenario, also returning the
/// final tree.
pub fn run_trial_on(
    config: &ScenarioConfig,
    system: &SystemModel,
    env: &Environment,
    trial: u32,
) -> Result<(TrialRecord, PlannerTree)> {
    let seed = config.trial_seed(trial);
    let planner_config = config.planner_config.clone().with_seed(seed);
    let mut planner = Planner::new(config.planner, system, env, planner_config)?;
    let mut rows = Vec::new();
    let mut first_solution = None;
    let mut milestone = 1u64;
    let mut planning = 0.0;
    loop {
        let done = match config.budget {
            Budget::Iterations(n) => planner.iterations() >= n,
            Budget::Seconds(s) => planning >= s,
        };
        if done {
            break;
        }
        let start = Instant::now();
        planner.step();
        planning += start.elapsed().as_secs_f64();
        if first_solution.is_none() {
            if let Some(cost) = planner.tree().best_cost() {
                first_solution = Some(FirstSolution {
                    iteration: planner.iterations(),
                    wall_seconds: planning,
                    cost,
                });
            }
        }
        if planner.iterations() == milestone {
            rows.push(sample(&planner, seed, planning));
            milestone *= 2;
        }
    }
    if rows.last().map_or(true, |r| r.iteration != planner.iterations()) {
        rows.push(sample(&planner, seed, planning));
    }
    let record = TrialRecord {
        seed,
        rows,
        first_solution,
    };
    Ok((record, planner.into_tree()))
}

/// How a batch of trials is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// One trial per worker thread. Falls back to sequential without the
    /// `parallel` feature.
    Parallel,
}

/// All trials of a scenario, in trial order.
pub fn run_trials(config: &ScenarioConfig) -> Result<Vec<TrialRecord>> {
    run_trials_with(config, Execution::Parallel)
}

pub fn run_trials_with(config: &ScenarioConfig, execution: Execution) -> Result<Vec<TrialRecord>> {
    let (system, env) = config.resolve()?;
    let run = |trial| run_resolved(config, &system, &env, trial);
    match execution {
        Execution::Sequential => (0..config.trials).map(run).collect(),
        Execution::Parallel => parallel_map(config.trials, run),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T: Send>(
    count: u32,
    f: impl Fn(u32) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T: Send>(count: u32, f: impl Fn(u32) -> Result<T>) -> Result<Vec<T>> {
    (0..count).map(f).collect()
}

/// Mean, min and max of one metric at one iteration across trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub iteration: u64,
    pub trials: usize,
    pub nodes_mean: f64,
    pub nodes_min: usize,
    pub nodes_max: usize,
    pub average_cost_mean: f64,
    pub solved: usize,
    pub best_cost_mean: Option<f64>,
    pub best_cost_min: Option<f64>,
    pub best_cost_max: Option<f64>,
    pub wall_seconds_mean: f64,
}

/// Aggregates rows sharing an iteration count. Trials that stopped early
/// (time budgets) only contribute to the iterations they reached.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut iterations: Vec<u64> = records
        .iter()
        .flat_map(|r| r.rows.iter().map(|row| row.iteration))
        .collect();
    iterations.sort_unstable();
    iterations.dedup();
    iterations
        .into_iter()
        .filter_map(|it| {
            let rows: Vec<&MetricsRow> = records
                .iter()
                .filter_map(|r| r.rows.iter().find(|row| row.iteration == it))
                .collect();
            if rows.is_empty() {
                return None;
            }
            let n = rows.len() as f64;
            let costs: Vec<f64> = rows.iter().filter_map(|r| r.best_cost).collect();
            let solved = costs.len();
            let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
            Some(SummaryRow {
                iteration: it,
                trials: rows.len(),
                nodes_mean: rows.iter().map(|r| r.nodes as f64).sum::<f64>() / n,
                nodes_min: rows.iter().map(|r| r.nodes).min().unwrap_or(0),
                nodes_max: rows.iter().map(|r| r.nodes).max().unwrap_or(0),
                average_cost_mean: rows.iter().map(|r| r.average_cost).sum::<f64>() / n,
                solved,
                best_cost_mean: mean(&costs),
                best_cost_min: costs.iter().copied().reduce(f64::min),
                best_cost_max: costs.iter().copied().reduce(f64::max),
                wall_seconds_mean: rows.iter().map(|r| r.wall_seconds).sum::<f64>() / n,
            })
        })
        .collect()
}

/// Key/value description of the machine, written next to timing data.
pub fn hardware_info() -> Vec<(String, String)> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![
        ("os".into(), std::env::consts::OS.into()),
        ("arch".into(), std::env::consts::ARCH.into()),
        ("threads".into(), threads.to_string()),
        ("parallel".into(), cfg!(feature = "parallel").to_string()),
    ]
}
