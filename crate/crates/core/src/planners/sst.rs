use rand::Rng;

use super::{Planner, PlannerConfig, PlannerKind, PlannerTree};
use crate::dynamics::StateVector;
use crate::error::Result;
use crate::nn::Neighbor;
use crate::systems::{Environment, SystemModel};

/// Samples a state and picks the cheapest active node within `delta_bn`
/// of it, or the nearest active node when none is that close.
pub fn best_first_selection_sst<R: Rng + ?Sized>(
    tree: &mut PlannerTree,
    system: &SystemModel,
    delta_bn: f64,
    rng: &mut R,
) -> usize {
    let sample = system.sample_state(rng);
    select_near(tree, &sample, delta_bn)
}

pub(crate) fn select_near(tree: &mut PlannerTree, sample: &[f64], delta_bn: f64) -> usize {
    let near = tree
        .active_index_mut()
        .find_within_radius(sample, delta_bn)
        .expect("active set is never empty");
    if near.is_empty() {
        let hit = tree
            .active_index_mut()
            .find_closest(sample)
            .expect("active set is never empty");
        return tree.slot_node(hit.id);
    }
    near.iter()
        .map(|n| tree.slot_node(n.id))
        .map(|id| (tree.get(id).cost_from_root, id))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("non-empty")
        .1
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Locality {
    /// The covering witness has a representative at least as cheap.
    Dominated(usize),
    /// The covering witness would take the new node as representative.
    Improves(usize),
    /// No witness within `delta_s`.
    Uncovered,
}

fn classify(tree: &PlannerTree, witness: usize, distance: f64, cost: f64, delta_s: f64) -> Locality {
    if distance > delta_s {
        return Locality::Uncovered;
    }
    match tree.witness(witness).and_then(|w| w.rep) {
        Some(rep) if tree.get(rep).cost_from_root <= cost => Locality::Dominated(witness),
        _ => Locality::Improves(witness),
    }
}

fn graph_locality(tree: &mut PlannerTree, x: &[f64], cost: f64, delta_s: f64) -> Locality {
    let Neighbor { id, distance } = tree
        .witness_index_mut()
        .find_closest(x)
        .expect("witness set is never empty");
    classify(tree, id, distance, cost, delta_s)
}

/// The graph is approximate, so a graph miss beyond `delta_s` is confirmed
/// by a scan before it counts as uncovered. This keeps witnesses strictly
/// more than `delta_s` apart.
fn confirm_uncovered(tree: &PlannerTree, x: &[f64], cost: f64, delta_s: f64) -> Locality {
    let (id, distance) = tree.scan_witnesses(x).expect("witness set is never empty");
    classify(tree, id, distance, cost, delta_s)
}

/// Finds the witness governing `x_new`, creating one at `x_new` when none
/// lies within `delta_s`. Returns whether `x_new` would be the cheapest
/// node of that witness, and the witness id.
pub fn is_node_locally_best_sst(
    tree: &mut PlannerTree,
    x_new: &StateVector,
    cost_new: f64,
    delta_s: f64,
) -> (bool, usize) {
    let mut found = graph_locality(tree, x_new, cost_new, delta_s);
    if found == Locality::Uncovered {
        found = confirm_uncovered(tree, x_new, cost_new, delta_s);
    }
    match found {
        Locality::Dominated(w) => (false, w),
        Locality::Improves(w) => (true, w),
        Locality::Uncovered => (true, tree.add_witness(x_new.clone())),
    }
}

/// Makes `x_new` the representative of `witness`. The previous
/// representative becomes inactive, and it and any ancestors left as
/// inactive leaves are deleted.
pub fn prune_dominated_nodes_sst(tree: &mut PlannerTree, x_new: usize, witness: usize) {
    let previous = tree.witness_mut(witness).rep.replace(x_new);
    let Some(mut cur) = previous else {
        return;
    };
    tree.deactivate(cur);
    loop {
        let node = tree.get(cur);
        if node.active || !node.is_leaf() {
            break;
        }
        let parent = node.parent;
        tree.remove_leaf(cur);
        match parent {
            Some(p) => cur = p,
            None => break,
        }
    }
}

/// Runs `config.iterations` SST iterations, growing `existing` if given.
pub fn sst<R: Rng>(
    system: &SystemModel,
    env: &Environment,
    config: &PlannerConfig,
    rng: &mut R,
    existing: Option<PlannerTree>,
) -> Result<PlannerTree> {
    let mut planner =
        Planner::with_rng(PlannerKind::Sst, system, env, config.clone(), rng, existing)?;
    planner.run(config.iterations);
    Ok(planner.into_tree())
}

/// SST with radii shrinking by `xi` between sprints of growing length, for
/// `config.iterations` iterations in total.
pub fn sst_star<R: Rng>(
    system: &SystemModel,
    env: &Environment,
    config: &PlannerConfig,
    rng: &mut R,
) -> Result<PlannerTree> {
    let mut planner = Planner::with_rng(PlannerKind::SstStar, system, env, config.clone(), rng, None)?;
    planner.run(config.iterations);
    Ok(planner.into_tree())
}

/// Iterations of sprint `j`: `n0` for the first, then
/// `ceil((1 + ln j) · xi^-(d+l+1)j · n0)`.
pub fn sprint_length(j: u32, xi: f64, n0: u64, state_dim: usize, control_dim: usize) -> u64 {
    if j == 0 {
        return n0;
    }
    let exponent = -(((state_dim + control_dim + 1) as f64) * j as f64);
    let n = (1.0 + (j as f64).ln()) * xi.powf(exponent) * n0 as f64;
    (n.ceil() as u64).max(1)
}

/// One SST* sprint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sprint {
    pub index: u32,
    pub delta_s: f64,
    pub delta_bn: f64,
    pub iterations: u64,
}

/// The first `count` sprints.
pub fn sst_star_schedule(
    delta_s: f64,
    delta_bn: f64,
    xi: f64,
    n0: u64,
    state_dim: usize,
    control_dim: usize,
    count: u32,
) -> Vec<Sprint> {
    let (mut ds, mut dbn) = (delta_s, delta_bn);
    (0..count)
        .map(|j| {
            if j > 0 {
                ds *= xi;
                dbn *= xi;
            }
            Sprint {
                index: j,
                delta_s: ds,
                delta_bn: dbn,
                iterations: sprint_length(j, xi, n0, state_dim, control_dim),
            }
        })
        .collect()
}

impl<R: Rng> Planner<'_, R> {
    pub(super) fn step_sst(&mut self) {
        let (delta_s, delta_bn) = (self.delta_s, self.delta_bn);
        let selected = best_first_selection_sst(&mut self.tree, self.system, delta_bn, &mut self.rng);
        let x = &self.tree.get(selected).state;
        let Ok(traj) = super::monte_carlo_prop_with(
            self.system,
            x,
            self.config.t_prop,
            &mut self.rng,
            &mut self.ws,
        ) else {
            return;
        };
        let cost = self.tree.get(selected).cost_from_root + traj.cost;
        let x_new = StateVector::from(traj.final_state());

        let witness = if self.config.collision_first {
            if !self.env.collision_free(&traj) {
                return;
            }
            match is_node_locally_best_sst(&mut self.tree, &x_new, cost, delta_s) {
                (true, w) => w,
                (false, _) => return,
            }
        } else {
            let found = graph_locality(&mut self.tree, &x_new, cost, delta_s);
            if matches!(found, Locality::Dominated(_)) || !self.env.collision_free(&traj) {
                return;
            }
            let found = match found {
                Locality::Uncovered => confirm_uncovered(&self.tree, &x_new, cost, delta_s),
                other => other,
            };
            match found {
                Locality::Dominated(_) => return,
                Locality::Improves(w) => w,
                Locality::Uncovered => self.tree.add_witness(x_new.clone()),
            }
        };
        let id = self.attach(selected, traj);
        prune_dominated_nodes_sst(&mut self.tree, id, witness);
    }
}
