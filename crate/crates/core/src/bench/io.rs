use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::MetricsRow;
use crate::error::{Error, Result};

/// Wall-clock column of a metrics row, kept in its own file so the metrics
/// file depends only on the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub seed: u64,
    pub iteration: u64,
    pub wall_seconds: f64,
}

/// Writes `rows` with a header line. Parent directories are created.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut out = csv::Writer::from_path(path)?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut input = csv::Reader::from_path(path)?;
    input.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Writes `metrics.csv` and `timing.csv` into `dir`.
pub fn write_metrics(dir: &Path, rows: &[MetricsRow]) -> Result<()> {
    write_csv(&dir.join("metrics.csv"), rows)?;
    let timing: Vec<TimingRow> = rows
        .iter()
        .map(|r| TimingRow {
            seed: r.seed,
            iteration: r.iteration,
            wall_seconds: r.wall_seconds,
        })
        .collect();
    write_csv(&dir.join("timing.csv"), &timing)
}

/// Reads back what [`write_metrics`] wrote.
pub fn read_metrics(dir: &Path) -> Result<Vec<MetricsRow>> {
    let mut rows: Vec<MetricsRow> = read_csv(&dir.join("metrics.csv"))?;
    let timing: Vec<TimingRow> = read_csv(&dir.join("timing.csv"))?;
    if timing.len() != rows.len() {
        return Err(Error::InvalidConfig(format!(
            "{} metrics rows but {} timing rows",
            rows.len(),
            timing.len()
        )));
    }
    for (row, t) in rows.iter_mut().zip(timing) {
        if (row.seed, row.iteration) != (t.seed, t.iteration) {
            return Err(Error::InvalidConfig(format!(
                "timing row ({}, {}) does not match metrics row ({}, {})",
                t.seed, t.iteration, row.seed, row.iteration
            )));
        }
        row.wall_seconds = t.wall_seconds;
    }
    Ok(rows)
}
