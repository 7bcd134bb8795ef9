use crate::dynamics::{propagate, ControlSegment, PiecewiseControl, StateVector, Trajectory};
use crate::error::{Error, Result};
use crate::nn::{Distance, NeighborGraph, NodeId};
use crate::systems::{Environment, Metric, SystemModel};

/// A vertex of the search tree. The edge into it from its parent is a
/// single constant-control segment.
#[derive(Clone, Debug)]
pub struct TreeNode {
    pub id: usize,
    pub state: StateVector,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub cost_from_root: f64,
    pub active: bool,
    pub edge: Option<ControlSegment>,
    pub(crate) slot: Option<NodeId>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// A permanent sample anchoring a neighborhood with one representative.
#[derive(Clone, Debug)]
pub struct Witness {
    pub id: usize,
    pub state: StateVector,
    pub rep: Option<usize>,
}

/// Best trajectory found so far, frozen at the time it was found.
#[derive(Clone, Debug)]
pub struct Solution {
    pub node: usize,
    pub cost: f64,
    /// States from the root to the goal node.
    pub waypoints: Vec<StateVector>,
    pub control: PiecewiseControl,
}

/// Tree storage shared by all planners. Node ids are never reused; removed
/// nodes leave a hole.
#[derive(Clone, Debug)]
pub struct PlannerTree {
    metric: Metric,
    nodes: Vec<Option<TreeNode>>,
    live: usize,
    witnesses: Vec<Witness>,
    active_index: NeighborGraph<Metric>,
    witness_index: NeighborGraph<Metric>,
    slot_to_node: Vec<usize>,
    best: Option<Solution>,
}

impl PlannerTree {
    /// A tree holding only `root`, indexed as active.
    pub fn new(system: &SystemModel, root: StateVector, seed: u64) -> Self {
        let metric = system.metric().clone();
        let mut tree = Self {
            active_index: NeighborGraph::new(metric.clone(), seed ^ 0x5eed_0001),
            witness_index: NeighborGraph::new(metric.clone(), seed ^ 0x5eed_0002),
            metric,
            nodes: Vec::new(),
            live: 0,
            witnesses: Vec::new(),
            slot_to_node: Vec::new(),
            best: None,
        };
        tree.insert(root, None, None, 0.0);
        tree
    }

    pub fn root(&self) -> &TreeNode {
        self.nodes[0].as_ref().expect("root is never removed")
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn node(&self, id: usize) -> Option<&TreeNode> {
        self.nodes.get(id).and_then(Option::as_ref)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode> + '_ {
        self.nodes.iter().flatten()
    }

    /// One past the largest id handed out so far.
    pub fn id_bound(&self) -> usize {
        self.nodes.len()
    }

    pub fn active_count(&self) -> usize {
        self.active_index.len()
    }

    pub fn witnesses(&self) -> &[Witness] {
        &self.witnesses
    }

    pub fn witness(&self, id: usize) -> Option<&Witness> {
        self.witnesses.get(id)
    }

    pub fn best_solution(&self) -> Option<&Solution> {
        self.best.as_ref()
    }

    pub fn best_cost(&self) -> Option<f64> {
        self.best.as_ref().map(|s| s.cost)
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    /// Mean cost-from-root over every stored node.
    pub fn average_cost(&self) -> f64 {
        let total: f64 = self.nodes().map(|n| n.cost_from_root).sum();
        total / self.live as f64
    }

    pub(crate) fn node_mut(&mut self, id: usize) -> &mut TreeNode {
        self.nodes[id].as_mut().expect("live node")
    }

    pub(crate) fn get(&self, id: usize) -> &TreeNode {
        self.nodes[id].as_ref().expect("live node")
    }

    /// Adds an active node reached from `parent` along `edge`.
    pub fn add_child(&mut self, parent: usize, state: StateVector, edge: ControlSegment) -> usize {
        let cost = self.get(parent).cost_from_root + edge.duration;
        self.insert(state, Some(parent), Some(edge), cost)
    }

    pub(crate) fn insert(
        &mut self,
        state: StateVector,
        parent: Option<usize>,
        edge: Option<ControlSegment>,
        cost: f64,
    ) -> usize {
        let id = self.nodes.len();
        let slot = self.active_index.add_node(&state);
        debug_assert_eq!(slot, self.slot_to_node.len());
        self.slot_to_node.push(id);
        if let Some(p) = parent {
            self.node_mut(p).children.push(id);
        }
        self.nodes.push(Some(TreeNode {
            id,
            state,
            parent,
            children: Vec::new(),
            cost_from_root: cost,
            active: true,
            edge,
            slot: Some(slot),
        }));
        self.live += 1;
        id
    }

    pub(crate) fn deactivate(&mut self, id: usize) {
        let node = self.node_mut(id);
        node.active = false;
        if let Some(slot) = node.slot.take() {
            self.active_index
                .remove_node(slot)
                .expect("active node is indexed");
        }
    }

    /// Deletes a childless node.
    pub(crate) fn remove_leaf(&mut self, id: usize) {
        let node = self.nodes[id].take().expect("live node");
        debug_assert!(node.children.is_empty());
        if let Some(slot) = node.slot {
            self.active_index.remove_node(slot).expect("indexed");
        }
        if let Some(p) = node.parent {
            let children = &mut self.node_mut(p).children;
            let pos = children.iter().position(|&c| c == id).expect("child link");
            children.swap_remove(pos);
        }
        self.live -= 1;
    }

    pub(crate) fn slot_node(&self, slot: NodeId) -> usize {
        self.slot_to_node[slot]
    }

    pub(crate) fn active_index_mut(&mut self) -> &mut NeighborGraph<Metric> {
        &mut self.active_index
    }

    pub(crate) fn witness_index_mut(&mut self) -> &mut NeighborGraph<Metric> {
        &mut self.witness_index
    }

    /// Adds a witness without a representative.
    pub fn add_witness(&mut self, state: StateVector) -> usize {
        let id = self.witness_index.add_node(&state);
        debug_assert_eq!(id, self.witnesses.len());
        self.witnesses.push(Witness { id, state, rep: None });
        id
    }

    pub(crate) fn witness_mut(&mut self, id: usize) -> &mut Witness {
        &mut self.witnesses[id]
    }

    /// Exact nearest witness by linear scan.
    pub(crate) fn scan_witnesses(&self, x: &[f64]) -> Option<(usize, f64)> {
        self.witnesses
            .iter()
            .map(|w| (w.id, self.metric.distance(x, &w.state)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    /// Moves `node` and its subtree under `parent` with a new edge.
    pub(crate) fn reparent(&mut self, node: usize, parent: usize, edge: ControlSegment) {
        let old_parent = self.get(node).parent.expect("root is never rewired");
        let children = &mut self.node_mut(old_parent).children;
        let pos = children.iter().position(|&c| c == node).expect("child link");
        children.swap_remove(pos);
        self.node_mut(parent).children.push(node);
        let cost = self.get(parent).cost_from_root + edge.duration;
        let n = self.node_mut(node);
        n.parent = Some(parent);
        n.edge = Some(edge);
        let delta = cost - n.cost_from_root;
        n.cost_from_root = cost;
        let mut stack = n.children.clone();
        while let Some(id) = stack.pop() {
            let n = self.node_mut(id);
            n.cost_from_root += delta;
            stack.extend_from_slice(&n.children);
        }
    }

    /// Root-to-node path as node ids.
    pub fn path_to(&self, id: usize) -> Vec<usize> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.get(cur).parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Records `id` as the best solution when it beats the incumbent.
    pub fn offer_solution(&mut self, id: usize) -> bool {
        let cost = self.get(id).cost_from_root;
        if self.best.as_ref().is_some_and(|b| b.cost <= cost) {
            return false;
        }
        let path = self.path_to(id);
        let mut control = PiecewiseControl::new();
        for &n in &path[1..] {
            let edge = self.get(n).edge.clone().expect("non-root edge");
            control.push(edge.control, edge.duration);
        }
        self.best = Some(Solution {
            node: id,
            cost,
            waypoints: path.iter().map(|&n| self.get(n).state.clone()).collect(),
            control,
        });
        true
    }

    /// Returns a description of every broken structural invariant. Witness
    /// checks are skipped for trees without witnesses.
    pub fn check_invariants(&self, delta_s: f64) -> Vec<String> {
        let mut errors = Vec::new();
        let root = self.root();
        if root.parent.is_some() || root.cost_from_root != 0.0 {
            errors.push("root has a parent or nonzero cost".into());
        }
        let mut active = 0;
        for node in self.nodes() {
            if node.active {
                active += 1;
                if node.slot.is_none() {
                    errors.push(format!("active node {} is not indexed", node.id));
                }
            } else if node.is_leaf() {
                errors.push(format!("inactive leaf {}", node.id));
            }
            if let Some(p) = node.parent {
                match self.node(p) {
                    None => errors.push(format!("node {} has removed parent {p}", node.id)),
                    Some(parent) => {
                        if !parent.children.contains(&node.id) {
                            errors.push(format!("parent {p} does not list child {}", node.id));
                        }
                        let edge = node.edge.as_ref().map_or(f64::NAN, |e| e.duration);
                        let expect = parent.cost_from_root + edge;
                        if (expect - node.cost_from_root).abs() > 1e-9 {
                            errors.push(format!("cost mismatch at node {}", node.id));
                        }
                    }
                }
            }
            for &c in &node.children {
                if self.node(c).and_then(|c| c.parent) != Some(node.id) {
                    errors.push(format!("child {c} of {} does not point back", node.id));
                }
            }
        }
        if active != self.active_index.len() {
            errors.push(format!(
                "{active} active nodes but {} indexed",
                self.active_index.len()
            ));
        }
        if let Err(e) = self.active_index.check_invariants() {
            errors.push(format!("active index: {e}"));
        }
        if self.witnesses.is_empty() {
            return errors;
        }
        if self.witnesses.len() != active {
            errors.push(format!(
                "{} witnesses but {active} active nodes",
                self.witnesses.len()
            ));
        }
        let mut represented = vec![false; self.nodes.len()];
        for w in &self.witnesses {
            match w.rep.and_then(|r| self.node(r).map(|n| (r, n))) {
                None => errors.push(format!("witness {} has no live representative", w.id)),
                Some((r, n)) => {
                    if !n.active {
                        errors.push(format!("witness {} represented by inactive {r}", w.id));
                    }
                    if represented[r] {
                        errors.push(format!("node {r} represents two witnesses"));
                    }
                    represented[r] = true;
                }
            }
        }
        for node in self.nodes() {
            if node.active && !represented[node.id] {
                errors.push(format!("active node {} represents no witness", node.id));
            }
        }
        for (i, a) in self.witnesses.iter().enumerate() {
            for b in &self.witnesses[i + 1..] {
                let d = self.metric.distance(&a.state, &b.state);
                if d <= delta_s {
                    errors.push(format!("witnesses {} and {} only {d} apart", a.id, b.id));
                }
            }
        }
        errors
    }
}

/// Replays the best solution from the root. Absent until some node has
/// reached the goal region.
pub fn solution_query(
    tree: &PlannerTree,
    system: &SystemModel,
    env: &Environment,
) -> Result<Option<Trajectory>> {
    let Some(best) = tree.best_solution() else {
        return Ok(None);
    };
    let root = &best.waypoints[0];
    if best.control.is_empty() {
        return Ok(env.in_goal(root).then(|| Trajectory::at(root)));
    }
    let traj = propagate(system, root, &best.control, system.dt)?;
    if !env.in_goal(traj.final_state()) {
        return Err(Error::InvalidConfig(
            "stored solution no longer ends in the goal region".into(),
        ));
    }
    Ok(Some(traj))
}
