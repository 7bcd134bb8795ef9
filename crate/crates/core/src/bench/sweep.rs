use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{parallel_map, run_resolved, ScenarioConfig, TrialRecord};
use crate::error::Result;

/// Means over the trials of one `(delta_s, delta_bn)` pair. Solution
/// statistics only count trials that found a solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub delta_s: f64,
    pub delta_bn: f64,
    pub trials: usize,
    pub solved: usize,
    /// Seconds until the first solution.
    pub it_seconds: Option<f64>,
    pub it_iterations: Option<f64>,
    /// Cost of the first solution.
    pub ic: Option<f64>,
    /// Cost at the end of the budget.
    pub fc: Option<f64>,
}

impl SweepCell {
    fn from_records(delta_s: f64, delta_bn: f64, records: &[TrialRecord]) -> Self {
        let solved: Vec<_> = records.iter().filter_map(|r| r.first_solution).collect();
        let finals: Vec<f64> = records.iter().filter_map(|r| r.last().best_cost).collect();
        let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        Self {
            delta_s,
            delta_bn,
            trials: records.len(),
            solved: solved.len(),
            it_seconds: mean(solved.iter().map(|s| s.wall_seconds).collect()),
            it_iterations: mean(solved.iter().map(|s| s.iteration as f64).collect()),
            ic: mean(solved.iter().map(|s| s.cost).collect()),
            fc: mean(finals),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub delta_s_values: Vec<f64>,
    pub delta_bn_values: Vec<f64>,
    /// Row-major: one row per `delta_s`.
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn cell(&self, delta_s: f64, delta_bn: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.delta_s == delta_s && c.delta_bn == delta_bn)
    }

    /// Text table with one row per `delta_s` and an IT/IC/FC triple per
    /// `delta_bn` column.
    pub fn to_text(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        let mut out = String::from("delta_s \\ delta_bn");
        for bn in &self.delta_bn_values {
            let _ = write!(out, " | {bn:^26}");
        }
        out.push('\n');
        out.push_str(&" ".repeat(18));
        for _ in &self.delta_bn_values {
            let _ = write!(out, " | {:>8} {:>8} {:>8}", "IT", "IC", "FC");
        }
        out.push('\n');
        for row in self.cells.chunks(self.delta_bn_values.len()) {
            let _ = write!(out, "{:>18}", row[0].delta_s);
            for c in row {
                let _ = write!(
                    out,
                    " | {:>8} {:>8} {:>8}",
                    fmt(c.it_seconds),
                    fmt(c.ic),
                    fmt(c.fc)
                );
            }
            out.push('\n');
        }
        out
    }
}

/// Runs every trial of `base` for each radius pair.
pub fn sweep_params(
    base: &ScenarioConfig,
    delta_s_values: &[f64],
    delta_bn_values: &[f64],
) -> Result<SweepTable> {
    let configs: Vec<ScenarioConfig> = delta_s_values
        .iter()
        .flat_map(|&ds| {
            delta_bn_values
                .iter()
                .map(move |&bn| base.clone().with_radii(ds, bn))
        })
        .collect();
    let mut resolved = Vec::with_capacity(configs.len());
    for c in &configs {
        resolved.push(c.resolve()?);
    }
    let trials = base.trials;
    let jobs = configs.len() as u32 * trials;
    let records = parallel_map(jobs, |job| {
        let (cell, trial) = ((job / trials) as usize, job % trials);
        let (system, env) = &resolved[cell];
        run_resolved(&configs[cell], system, env, trial)
    })?;
    let cells = records
        .chunks(trials as usize)
        .zip(&configs)
        .map(|(recs, c)| {
            SweepCell::from_records(c.planner_config.delta_s, c.planner_config.delta_bn, recs)
        })
        .collect();
    Ok(SweepTable {
        delta_s_values: delta_s_values.to_vec(),
        delta_bn_values: delta_bn_values.to_vec(),
        cells,
    })
}
