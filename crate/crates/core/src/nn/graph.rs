use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Distance, Neighbor, NodeId, ProximityIndex};
use crate::error::{Error, Result};

/// Tunables of the graph structure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphParams {
    /// Lower bound on the number of edges created per insertion.
    pub k_min: usize,
    /// Insertions connect to `max(k_min, ceil(k_scale · ln |V|))` nodes.
    pub k_scale: f64,
    /// Queries start from `ceil(seed_scale · sqrt |V|)` random vertices.
    pub seed_scale: f64,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            k_min: 4,
            k_scale: 2.0,
            seed_scale: 1.0,
        }
    }
}

/// Operation counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GraphStats {
    pub distance_evals: u64,
    /// Adjacency entries touched by removals.
    pub removal_edge_updates: u64,
    pub removals: u64,
}

#[derive(Clone, Debug)]
struct Vertex {
    state: Vec<f64>,
    adjacency: Vec<NodeId>,
}

/// Undirected proximity graph queried by randomized hill climbing.
///
/// Each inserted state is linked to roughly a logarithmic number of its
/// closest stored states. Removal only unlinks the vertex, so it costs time
/// proportional to its degree and never triggers a rebuild. Not thread-safe
/// for mutation; queries need `&mut self` for the random seeding and the
/// visit marks.
#[derive(Clone, Debug)]
pub struct NeighborGraph<D> {
    metric: D,
    params: GraphParams,
    vertices: Vec<Option<Vertex>>,
    /// Live ids, dense, for uniform seeding.
    live: Vec<NodeId>,
    /// Position of each id in `live`.
    live_pos: Vec<usize>,
    marks: Vec<u32>,
    epoch: u32,
    rng: ChaCha8Rng,
    stats: GraphStats,
}

impl<D: Distance> NeighborGraph<D> {
    pub fn new(metric: D, seed: u64) -> Self {
        Self::with_params(metric, seed, GraphParams::default())
    }

    pub fn with_params(metric: D, seed: u64, params: GraphParams) -> Self {
        Self {
            metric,
            params,
            vertices: Vec::new(),
            live: Vec::new(),
            live_pos: Vec::new(),
            marks: Vec::new(),
            epoch: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: GraphStats::default(),
        }
    }

    pub fn params(&self) -> &GraphParams {
        &self.params
    }

    pub fn stats(&self) -> GraphStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        matches!(self.vertices.get(id), Some(Some(_)))
    }

    pub fn state(&self, id: NodeId) -> Option<&[f64]> {
        self.vertex(id).map(|v| v.state.as_slice())
    }

    pub fn neighbors(&self, id: NodeId) -> Option<&[NodeId]> {
        self.vertex(id).map(|v| v.adjacency.as_slice())
    }

    /// Live ids in insertion-independent but deterministic order.
    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.live.iter().copied()
    }

    /// Edge count for an insertion into a graph that will hold `n` nodes.
    pub fn connection_count(&self, n: usize) -> usize {
        let log_k = (self.params.k_scale * (n.max(1) as f64).ln()).ceil() as usize;
        self.params.k_min.max(log_k)
    }

    fn vertex(&self, id: NodeId) -> Option<&Vertex> {
        self.vertices.get(id).and_then(Option::as_ref)
    }

    #[inline]
    fn dist(&mut self, query: &[f64], id: NodeId) -> f64 {
        self.stats.distance_evals += 1;
        let v = self.vertices[id].as_ref().expect("live vertex");
        self.metric.distance(query, &v.state)
    }

    fn new_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
    }

    /// Marks `id` visited; false if it already was in this epoch.
    #[inline]
    fn visit(&mut self, id: NodeId) -> bool {
        if self.marks[id] == self.epoch {
            false
        } else {
            self.marks[id] = self.epoch;
            true
        }
    }

    /// Inserts `state` and links it to its approximate k closest nodes.
    pub fn add_node(&mut self, state: &[f64]) -> NodeId {
        let k = self.connection_count(self.live.len() + 1);
        let links: Vec<NodeId> = if self.live.is_empty() {
            Vec::new()
        } else {
            self.find_k_close(state, k)
                .expect("non-empty graph")
                .into_iter()
                .map(|n| n.id)
                .collect()
        };
        let id = self.vertices.len();
        for &other in &links {
            self.vertices[other]
                .as_mut()
                .expect("live vertex")
                .adjacency
                .push(id);
        }
        self.vertices.push(Some(Vertex {
            state: state.to_vec(),
            adjacency: links,
        }));
        self.marks.push(0);
        self.live_pos.push(self.live.len());
        self.live.push(id);
        id
    }

    /// Unlinks and drops a node.
    pub fn remove_node(&mut self, id: NodeId) -> Result<()> {
        let vertex = self
            .vertices
            .get_mut(id)
            .and_then(Option::take)
            .ok_or(Error::UnknownNode(id))?;
        for &other in &vertex.adjacency {
            let adj = &mut self.vertices[other].as_mut().expect("symmetric edge").adjacency;
            if let Some(pos) = adj.iter().position(|&x| x == id) {
                adj.swap_remove(pos);
            }
            self.stats.removal_edge_updates += 1;
        }
        let pos = self.live_pos[id];
        self.live.swap_remove(pos);
        if let Some(&moved) = self.live.get(pos) {
            self.live_pos[moved] = pos;
        }
        self.live_pos[id] = usize::MAX;
        self.stats.removals += 1;
        Ok(())
    }

    /// Randomly seeded hill climb. The result is no farther from `query`
    /// than any of its graph neighbors.
    pub fn find_closest(&mut self, query: &[f64]) -> Result<Neighbor> {
        if self.live.is_empty() {
            return Err(Error::EmptyGraph);
        }
        self.new_epoch();
        Ok(self.closest_in_epoch(query))
    }

    fn closest_in_epoch(&mut self, query: &[f64]) -> Neighbor {
        let n = self.live.len();
        let seeds = ((self.params.seed_scale * (n as f64).sqrt()).ceil() as usize).clamp(1, n);
        let mut best: Option<Neighbor> = None;
        for _ in 0..seeds {
            let id = self.live[self.rng.gen_range(0..n)];
            if !self.visit(id) {
                continue;
            }
            let cand = Neighbor::new(id, self.dist(query, id));
            if best.map_or(true, |b| cand.closer_than(&b)) {
                best = Some(cand);
            }
        }
        let mut best = best.expect("at least one seed");
        loop {
            let mut next = best;
            let count = self.vertices[best.id].as_ref().expect("live").adjacency.len();
            for i in 0..count {
                let nb = self.vertices[best.id].as_ref().expect("live").adjacency[i];
                if !self.visit(nb) {
                    continue;
                }
                let cand = Neighbor::new(nb, self.dist(query, nb));
                if cand.closer_than(&next) {
                    next = cand;
                }
            }
            if next.id == best.id {
                return best;
            }
            best = next;
        }
    }

    /// Neighborhood expansion from the closest node, keeping the `k` best,
    /// until nothing changes. Returns fewer than `min(k, |V|)` nodes only
    /// when the seed's connected component is smaller than that.
    pub fn find_k_close(&mut self, query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        if self.live.is_empty() {
            return Err(Error::EmptyGraph);
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        if k >= self.live.len() {
            let ids = self.live.clone();
            let mut all: Vec<Neighbor> = ids
                .into_iter()
                .map(|id| Neighbor::new(id, self.dist(query, id)))
                .collect();
            all.sort_by(Neighbor::cmp_key);
            return Ok(all);
        }
        self.new_epoch();
        let seed = self.closest_in_epoch(query);
        self.new_epoch();
        self.visit(seed.id);
        // Entries are (hit, expanded). Nodes evaluated once are never
        // reconsidered: the k-th best distance only shrinks.
        let mut best: Vec<(Neighbor, bool)> = vec![(seed, false)];
        while let Some(slot) = best.iter().position(|(_, done)| !done) {
            best[slot].1 = true;
            let from = best[slot].0.id;
            let count = self.vertices[from].as_ref().expect("live").adjacency.len();
            for i in 0..count {
                let nb = self.vertices[from].as_ref().expect("live").adjacency[i];
                if !self.visit(nb) {
                    continue;
                }
                let cand = Neighbor::new(nb, self.dist(query, nb));
                if best.len() == k && !cand.closer_than(&best[k - 1].0) {
                    continue;
                }
                let at = best.partition_point(|(b, _)| b.closer_than(&cand));
                best.insert(at, (cand, false));
                best.truncate(k);
            }
        }
        Ok(best.into_iter().map(|(n, _)| n).collect())
    }

    /// All nodes within `radius` reachable from the closest node through
    /// nodes that are themselves within `radius`.
    pub fn find_within_radius(&mut self, query: &[f64], radius: f64) -> Result<Vec<Neighbor>> {
        if self.live.is_empty() {
            return Err(Error::EmptyGraph);
        }
        self.new_epoch();
        let seed = self.closest_in_epoch(query);
        self.new_epoch();
        self.visit(seed.id);
        if seed.distance > radius {
            return Ok(Vec::new());
        }
        let mut hits = vec![seed];
        let mut stack = vec![seed.id];
        while let Some(from) = stack.pop() {
            let count = self.vertices[from].as_ref().expect("live").adjacency.len();
            for i in 0..count {
                let nb = self.vertices[from].as_ref().expect("live").adjacency[i];
                if !self.visit(nb) {
                    continue;
                }
                let d = self.dist(query, nb);
                if d <= radius {
                    hits.push(Neighbor::new(nb, d));
                    stack.push(nb);
                }
            }
        }
        hits.sort_by(Neighbor::cmp_key);
        Ok(hits)
    }

    /// Checks adjacency symmetry, absence of self-loops and dangling ids.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for &id in &self.live {
            let v = self.vertex(id).ok_or_else(|| format!("live id {id} has no vertex"))?;
            for &nb in &v.adjacency {
                if nb == id {
                    return Err(format!("self-loop at {id}"));
                }
                let other = self
                    .vertex(nb)
                    .ok_or_else(|| format!("{id} references removed id {nb}"))?;
                if !other.adjacency.contains(&id) {
                    return Err(format!("edge {id}->{nb} has no reverse"));
                }
            }
        }
        let alive = self.vertices.iter().filter(|v| v.is_some()).count();
        if alive != self.live.len() {
            return Err(format!("{alive} vertices but {} live ids", self.live.len()));
        }
        Ok(())
    }
}

impl<D: Distance> ProximityIndex for NeighborGraph<D> {
    fn len(&self) -> usize {
        self.live.len()
    }

    fn add(&mut self, state: &[f64]) -> NodeId {
        self.add_node(state)
    }

    fn remove(&mut self, id: NodeId) -> Result<()> {
        self.remove_node(id)
    }

    fn closest(&mut self, query: &[f64]) -> Result<Neighbor> {
        self.find_closest(query)
    }

    fn k_closest(&mut self, query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        self.find_k_close(query, k)
    }

    fn within_radius(&mut self, query: &[f64], radius: f64) -> Result<Vec<Neighbor>> {
        self.find_within_radius(query, radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::BruteForceIndex;
    use crate::systems::Metric;

    fn graph() -> NeighborGraph<Metric> {
        NeighborGraph::new(Metric::euclidean(2), 7)
    }

    fn uniform_points(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect()
    }

    #[test]
    fn first_node_has_no_edges() {
        let mut g = graph();
        let a = g.add_node(&[0.0, 0.0]);
        assert!(g.neighbors(a).unwrap().is_empty());
    }

    #[test]
    fn second_node_links_both_ways() {
        let mut g = graph();
        let a = g.add_node(&[0.0, 0.0]);
        let b = g.add_node(&[1.0, 0.0]);
        assert_eq!(g.neighbors(a).unwrap(), &[b]);
        assert_eq!(g.neighbors(b).unwrap(), &[a]);
    }

    #[test]
    fn add_then_remove_empties() {
        let mut g = graph();
        let a = g.add_node(&[0.0, 0.0]);
        g.remove_node(a).unwrap();
        assert!(g.is_empty());
        assert!(matches!(g.find_closest(&[0.0, 0.0]), Err(Error::EmptyGraph)));
        assert!(matches!(g.remove_node(a), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn empty_graph_errors() {
        let mut g = graph();
        assert!(g.find_k_close(&[0.0, 0.0], 3).is_err());
        assert!(g.find_within_radius(&[0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn single_node_is_closest() {
        let mut g = graph();
        let a = g.add_node(&[3.0, 3.0]);
        assert_eq!(g.find_closest(&[-5.0, 9.0]).unwrap().id, a);
    }

    #[test]
    fn stored_state_is_found_exactly() {
        let mut g = graph();
        let pts = uniform_points(500, 3);
        let ids: Vec<_> = pts.iter().map(|p| g.add_node(p)).collect();
        for (p, id) in pts.iter().zip(&ids).step_by(17) {
            let hit = g.find_closest(p).unwrap();
            assert_eq!((hit.id, hit.distance), (*id, 0.0));
        }
    }

    #[test]
    fn k_at_least_len_returns_everything() {
        let mut g = graph();
        for p in uniform_points(30, 4) {
            g.add_node(&p);
        }
        assert_eq!(g.find_k_close(&[0.5, 0.5], 30).unwrap().len(), 30);
        assert_eq!(g.find_k_close(&[0.5, 0.5], 100).unwrap().len(), 30);
    }

    #[test]
    fn k_one_matches_closest() {
        let mut g = graph();
        for p in uniform_points(400, 5) {
            g.add_node(&p);
        }
        for q in uniform_points(50, 6) {
            let one = g.find_k_close(&q, 1).unwrap();
            let c = g.find_closest(&q).unwrap();
            assert_eq!(one[0].distance, c.distance);
        }
    }

    #[test]
    fn radius_edge_cases() {
        let mut g = graph();
        for p in uniform_points(200, 8) {
            g.add_node(&p);
        }
        assert!(g.find_within_radius(&[5.0, 5.0], 0.1).unwrap().is_empty());
        assert_eq!(g.find_within_radius(&[0.5, 0.5], 2.0).unwrap().len(), 200);
    }

    #[test]
    fn interior_removal_keeps_symmetry() {
        let mut g = graph();
        let ids: Vec<_> = uniform_points(100, 9).iter().map(|p| g.add_node(p)).collect();
        let hub = g.find_closest(&[0.5, 0.5]).unwrap().id;
        g.remove_node(hub).unwrap();
        g.remove_node(ids[3]).unwrap_or(());
        g.check_invariants().unwrap();
        assert!(ids.iter().all(|&id| g.neighbors(id).map_or(true, |adj| !adj.contains(&hub))));
    }

    #[test]
    fn removal_touches_only_incident_edges() {
        let mut g = graph();
        for p in uniform_points(2_000, 10) {
            g.add_node(&p);
        }
        let victim = g.find_closest(&[0.2, 0.7]).unwrap().id;
        let degree = g.neighbors(victim).unwrap().len() as u64;
        let before = g.stats();
        g.remove_node(victim).unwrap();
        let after = g.stats();
        assert_eq!(after.removal_edge_updates - before.removal_edge_updates, degree);
        assert_eq!(after.distance_evals, before.distance_evals);
    }

    #[test]
    fn local_minimum_property() {
        let mut g = graph();
        for p in uniform_points(1_000, 11) {
            g.add_node(&p);
        }
        let metric = Metric::euclidean(2);
        for q in uniform_points(200, 12) {
            let hit = g.find_closest(&q).unwrap();
            for &nb in g.neighbors(hit.id).unwrap() {
                assert!(metric.distance(&q, g.state(nb).unwrap()) >= hit.distance);
            }
        }
    }

    #[test]
    fn close_agreement_with_oracle() {
        let mut g = graph();
        let mut brute = BruteForceIndex::new(Metric::euclidean(2));
        for p in uniform_points(3_000, 13) {
            g.add_node(&p);
            brute.add(&p);
        }
        let queries = uniform_points(300, 14);
        let agree = queries
            .iter()
            .filter(|q| g.find_closest(*q).unwrap().id == brute.closest(*q).unwrap().id)
            .count();
        assert!(agree >= 297, "{agree}/300");
    }
}
