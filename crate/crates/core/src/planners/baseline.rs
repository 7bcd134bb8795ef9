use std::f64::consts::E;

use rand::Rng;

use super::sst::select_near;
use super::{Planner, PlannerConfig, PlannerKind, PlannerTree};
use crate::dynamics::{propagate_with, ControlInput, ControlSegment, PiecewiseControl, StateVector};
use crate::error::Result;
use crate::nn::Distance;
use crate::systems::{Environment, SystemModel};

fn run<R: Rng>(
    kind: PlannerKind,
    system: &SystemModel,
    env: &Environment,
    config: &PlannerConfig,
    rng: &mut R,
) -> Result<PlannerTree> {
    let mut planner = Planner::with_rng(kind, system, env, config.clone(), rng, None)?;
    planner.run(config.iterations);
    Ok(planner.into_tree())
}

/// Extends a uniformly chosen node at every iteration.
pub fn naive_random_tree<R: Rng>(
    system: &SystemModel,
    env: &Environment,
    config: &PlannerConfig,
    rng: &mut R,
) -> Result<PlannerTree> {
    run(PlannerKind::NaiveRandomTree, system, env, config, rng)
}

/// Extends the node nearest to a uniformly sampled state.
pub fn rrt<R: Rng>(
    system: &SystemModel,
    env: &Environment,
    config: &PlannerConfig,
    rng: &mut R,
) -> Result<PlannerTree> {
    run(PlannerKind::Rrt, system, env, config, rng)
}

/// Extends the cheapest node within `delta_bn` of a sample, never pruning.
pub fn rrt_best_near<R: Rng>(
    system: &SystemModel,
    env: &Environment,
    config: &PlannerConfig,
    rng: &mut R,
) -> Result<PlannerTree> {
    run(PlannerKind::RrtBestNear, system, env, config, rng)
}

/// RRT* with straight-line steering for the kinematic point.
pub fn rrt_star_point<R: Rng>(
    system: &SystemModel,
    env: &Environment,
    config: &PlannerConfig,
    rng: &mut R,
) -> Result<PlannerTree> {
    run(PlannerKind::RrtStar, system, env, config, rng)
}

impl<R: Rng> Planner<'_, R> {
    pub(super) fn step_naive(&mut self) {
        // Nothing is ever removed, so ids are dense.
        let selected = self.rng.gen_range(0..self.tree.id_bound());
        if let Some(traj) = self.extend(selected) {
            self.attach(selected, traj);
        }
    }

    pub(super) fn step_rrt(&mut self) {
        let sample = self.system.sample_state(&mut self.rng);
        let hit = self
            .tree
            .active_index_mut()
            .find_closest(&sample)
            .expect("tree has a root");
        let selected = self.tree.slot_node(hit.id);
        if let Some(traj) = self.extend(selected) {
            self.attach(selected, traj);
        }
    }

    pub(super) fn step_best_near(&mut self) {
        let sample = self.system.sample_state(&mut self.rng);
        let selected = select_near(&mut self.tree, &sample, self.delta_bn);
        if let Some(traj) = self.extend(selected) {
            self.attach(selected, traj);
        }
    }

    /// Straight segment from `from` toward `to`, at most `max_len` long.
    fn steer(&mut self, from: usize, to: &[f64], max_len: f64) -> Option<(ControlSegment, StateVector)> {
        let x = &self.tree.get(from).state;
        let (dx, dy) = (to[0] - x[0], to[1] - x[1]);
        let len = dx.hypot(dy).min(max_len);
        if len <= 0.0 {
            return None;
        }
        let speed = self.system.control_bounds()[0].hi;
        let segment = ControlSegment {
            control: ControlInput::new(vec![speed, dy.atan2(dx)]),
            duration: len / speed,
        };
        let control = PiecewiseControl::constant(segment.control.clone(), segment.duration);
        let traj = propagate_with(self.system, x, &control, self.system.dt, &mut self.ws).ok()?;
        if !self.env.collision_free(&traj) {
            return None;
        }
        Some((segment, StateVector::from(traj.final_state())))
    }

    pub(super) fn step_rrt_star(&mut self) {
        let speed = self.system.control_bounds()[0].hi;
        let reach = speed * self.config.t_prop;
        let sample = self.system.sample_state(&mut self.rng);
        let nearest = {
            let hit = self.tree.active_index_mut().find_closest(&sample).expect("root");
            self.tree.slot_node(hit.id)
        };
        let Some((edge, x_new)) = self.steer(nearest, &sample, reach) else {
            return;
        };

        let n = (self.tree.len() + 1) as f64;
        let k = ((2.0 * E * n.ln()).ceil() as usize).max(1);
        let near: Vec<usize> = self
            .tree
            .active_index_mut()
            .find_k_close(&x_new, k)
            .expect("root")
            .into_iter()
            .map(|nb| self.tree.slot_node(nb.id))
            .collect();

        let metric = self.tree.metric().clone();
        let mut parent = nearest;
        let mut parent_edge = edge;
        let mut best = self.tree.get(nearest).cost_from_root + parent_edge.duration;
        for &c in &near {
            if c == nearest {
                continue;
            }
            let via = self.tree.get(c).cost_from_root
                + metric.distance(&self.tree.get(c).state, &x_new) / speed;
            if via < best {
                if let Some((e, _)) = self.steer(c, &x_new, f64::INFINITY) {
                    best = self.tree.get(c).cost_from_root + e.duration;
                    parent = c;
                    parent_edge = e;
                }
            }
        }
        let id = self.tree.insert(x_new.clone(), Some(parent), Some(parent_edge), best);

        let mut rewired = false;
        for &c in &near {
            if c == parent {
                continue;
            }
            let through = best + metric.distance(&x_new, &self.tree.get(c).state) / speed;
            if through < self.tree.get(c).cost_from_root {
                let target = self.tree.get(c).state.clone();
                if let Some((e, _)) = self.steer(id, &target, f64::INFINITY) {
                    if best + e.duration < self.tree.get(c).cost_from_root {
                        self.tree.reparent(c, id, e);
                        rewired = true;
                    }
                }
            }
        }
        self.note_goal(id);
        if rewired {
            for i in 0..self.goal_nodes.len() {
                self.tree.offer_solution(self.goal_nodes[i]);
            }
        }
    }
}
