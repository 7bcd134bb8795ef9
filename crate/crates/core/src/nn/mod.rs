//! Nearest-neighbor structures over stored states.
//!
//! [`NeighborGraph`] is the approximate, deletion-friendly structure the
//! planners use; [`BruteForceIndex`] is the exact linear scan it is checked
//! against.

mod brute;
mod graph;

pub use brute::BruteForceIndex;
pub use graph::{GraphParams, GraphStats, NeighborGraph};

use crate::error::Result;

/// Identifier handed out by a proximity index. Never reused.
pub type NodeId = usize;

/// A distance function over raw state slices.
pub trait Distance {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;
}

impl<F> Distance for F
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self(a, b)
    }
}

/// A (distance, id) hit. Ordered by distance, then by lowest id.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub id: NodeId,
    pub distance: f64,
}

impl Neighbor {
    pub fn new(id: NodeId, distance: f64) -> Self {
        Self { id, distance }
    }

    #[inline]
    pub fn closer_than(&self, other: &Neighbor) -> bool {
        self.distance < other.distance || (self.distance == other.distance && self.id < other.id)
    }

    pub(crate) fn cmp_key(a: &Neighbor, b: &Neighbor) -> std::cmp::Ordering {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.id.cmp(&b.id))
    }
}

/// Common interface of the exact and approximate structures.
pub trait ProximityIndex {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn add(&mut self, state: &[f64]) -> NodeId;

    fn remove(&mut self, id: NodeId) -> Result<()>;

    fn closest(&mut self, query: &[f64]) -> Result<Neighbor>;

    /// Up to `k` hits sorted by distance.
    fn k_closest(&mut self, query: &[f64], k: usize) -> Result<Vec<Neighbor>>;

    /// Hits with distance `<= radius`, sorted by distance.
    fn within_radius(&mut self, query: &[f64], radius: f64) -> Result<Vec<Neighbor>>;
}
