use super::{Distance, Neighbor, NodeId, ProximityIndex};
use crate::error::{Error, Result};

/// Exhaustive-scan index used as the accuracy oracle.
#[derive(Clone, Debug)]
pub struct BruteForceIndex<D> {
    metric: D,
    entries: Vec<Option<Vec<f64>>>,
    len: usize,
}

impl<D: Distance> BruteForceIndex<D> {
    pub fn new(metric: D) -> Self {
        Self {
            metric,
            entries: Vec::new(),
            len: 0,
        }
    }

    fn scan<'a>(&'a self, query: &'a [f64]) -> impl Iterator<Item = Neighbor> + 'a {
        self.entries.iter().enumerate().filter_map(move |(id, e)| {
            e.as_ref()
                .map(|s| Neighbor::new(id, self.metric.distance(query, s)))
        })
    }
}

impl<D: Distance> ProximityIndex for BruteForceIndex<D> {
    fn len(&self) -> usize {
        self.len
    }

    fn add(&mut self, state: &[f64]) -> NodeId {
        self.entries.push(Some(state.to_vec()));
        self.len += 1;
        self.entries.len() - 1
    }

    fn remove(&mut self, id: NodeId) -> Result<()> {
        match self.entries.get_mut(id) {
            Some(slot @ Some(_)) => {
                *slot = None;
                self.len -= 1;
                Ok(())
            }
            _ => Err(Error::UnknownNode(id)),
        }
    }

    fn closest(&mut self, query: &[f64]) -> Result<Neighbor> {
        self.scan(query)
            .reduce(|best, n| if n.closer_than(&best) { n } else { best })
            .ok_or(Error::EmptyGraph)
    }

    fn k_closest(&mut self, query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        if self.len == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut all: Vec<Neighbor> = self.scan(query).collect();
        all.sort_by(Neighbor::cmp_key);
        all.truncate(k);
        Ok(all)
    }

    fn within_radius(&mut self, query: &[f64], radius: f64) -> Result<Vec<Neighbor>> {
        if self.len == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut hits: Vec<Neighbor> = self.scan(query).filter(|n| n.distance <= radius).collect();
        hits.sort_by(Neighbor::cmp_key);
        Ok(hits)
    }
}
