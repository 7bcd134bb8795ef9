use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{BruteForceIndex, Neighbor, NeighborGraph, ProximityIndex};
use crate::systems::Metric;

/// Uniform points in the unit square queried by uniform points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NnProtocol {
    pub points: usize,
    pub queries: usize,
    pub k: usize,
    /// Range-query radius. `None` picks the radius whose disc holds `k`
    /// points on average.
    pub radius: Option<f64>,
    pub seed: u64,
}

impl Default for NnProtocol {
    fn default() -> Self {
        Self {
            points: 50_000,
            queries: 5_000,
            k: 10,
            radius: None,
            seed: 0,
        }
    }
}

impl NnProtocol {
    pub fn radius(&self) -> f64 {
        self.radius
            .unwrap_or_else(|| (self.k as f64 / (PI * self.points.max(1) as f64)).sqrt())
    }
}

/// Percentage of queries answered exactly like the exhaustive scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnAccuracy {
    pub structure: String,
    pub points: usize,
    pub queries: usize,
    pub k: usize,
    pub radius: f64,
    pub single: f64,
    pub k_close: f64,
    pub range: f64,
}

fn ids(hits: &[Neighbor]) -> Vec<usize> {
    let mut ids: Vec<usize> = hits.iter().map(|n| n.id).collect();
    ids.sort_unstable();
    ids
}

/// Builds `structure` (`brute` or `graph`) over the protocol's points and
/// compares single, k and range queries against a brute-force scan.
pub fn nn_accuracy_experiment(protocol: &NnProtocol, structure: &str) -> Result<NnAccuracy> {
    let metric = Metric::euclidean(2);
    let mut index: Box<dyn ProximityIndex> = match structure {
        "brute" => Box::new(BruteForceIndex::new(metric.clone())),
        "graph" => Box::new(NeighborGraph::new(metric.clone(), protocol.seed)),
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown structure `{other}`, expected brute or graph"
            )))
        }
    };
    if protocol.points == 0 {
        return Err(Error::InvalidConfig("at least one point is required".into()));
    }
    let mut oracle = BruteForceIndex::new(metric);
    let mut rng = ChaCha8Rng::seed_from_u64(protocol.seed);
    for _ in 0..protocol.points {
        let p = [rng.gen::<f64>(), rng.gen::<f64>()];
        index.add(&p);
        oracle.add(&p);
    }
    let radius = protocol.radius();
    let (mut single, mut k_close, mut range) = (0usize, 0usize, 0usize);
    for _ in 0..protocol.queries {
        let q = [rng.gen::<f64>(), rng.gen::<f64>()];
        if index.closest(&q)?.distance == oracle.closest(&q)?.distance {
            single += 1;
        }
        if ids(&index.k_closest(&q, protocol.k)?) == ids(&oracle.k_closest(&q, protocol.k)?) {
            k_close += 1;
        }
        if ids(&index.within_radius(&q, radius)?) == ids(&oracle.within_radius(&q, radius)?) {
            range += 1;
        }
    }
    let pct = |n: usize| {
        if protocol.queries == 0 {
            100.0
        } else {
            100.0 * n as f64 / protocol.queries as f64
        }
    };
    Ok(NnAccuracy {
        structure: structure.to_string(),
        points: protocol.points,
        queries: protocol.queries,
        k: protocol.k,
        radius,
        single: pct(single),
        k_close: pct(k_close),
        range: pct(range),
    })
}
