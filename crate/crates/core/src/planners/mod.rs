//! Tree planners driven by forward propagation.
//!
//! Every planner grows a [`PlannerTree`] from the environment's start
//! state. [`Planner`] runs one iteration at a time so callers can sample
//! metrics along the way; the free functions run a fixed iteration count.

mod baseline;
mod sst;
mod tree;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{propagate_with, ControlInput, PiecewiseControl, Rk4Workspace, StateVector, Trajectory};
use crate::error::{Error, Result};
use crate::systems::{Environment, SystemModel};

pub use baseline::{naive_random_tree, rrt, rrt_best_near, rrt_star_point};
pub use sst::{
    best_first_selection_sst, is_node_locally_best_sst, prune_dominated_nodes_sst, sprint_length,
    sst, sst_star, sst_star_schedule, Sprint,
};
pub use tree::{solution_query, PlannerTree, Solution, TreeNode, Witness};

/// Radius-shrinking parameters of SST*.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SstStarParams {
    pub xi: f64,
    pub n0: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerConfig {
    pub delta_bn: f64,
    pub delta_s: f64,
    pub t_prop: f64,
    pub iterations: u64,
    pub seed: u64,
    pub sststar: Option<SstStarParams>,
    /// Check collisions before the local-best test, as in the plain
    /// formulation. The default tests cost first since it is cheaper.
    pub collision_first: bool,
}

impl PlannerConfig {
    /// The system's default radii and horizon.
    pub fn for_system(system: &SystemModel) -> Self {
        Self {
            delta_bn: system.defaults.delta_bn,
            delta_s: system.defaults.delta_s,
            t_prop: system.defaults.t_prop,
            iterations: 0,
            seed: 0,
            sststar: None,
            collision_first: false,
        }
    }

    pub fn with_iterations(mut self, iterations: u64) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_radii(mut self, delta_s: f64, delta_bn: f64) -> Self {
        self.delta_s = delta_s;
        self.delta_bn = delta_bn;
        self
    }

    pub fn validate(&self, system: &SystemModel) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.delta_s > 0.0) || !self.delta_s.is_finite() {
            return bad(format!("delta_s must be positive, got {}", self.delta_s));
        }
        if !(self.delta_bn >= self.delta_s) || !self.delta_bn.is_finite() {
            return bad(format!(
                "delta_bn ({}) must not be smaller than delta_s ({})",
                self.delta_bn, self.delta_s
            ));
        }
        if !(self.t_prop > system.dt) || !self.t_prop.is_finite() {
            return bad(format!(
                "t_prop ({}) must exceed the integration step ({})",
                self.t_prop, system.dt
            ));
        }
        if let Some(p) = self.sststar {
            if !(p.xi > 0.0 && p.xi < 1.0) {
                return bad(format!("xi must lie in (0, 1), got {}", p.xi));
            }
            if p.n0 == 0 {
                return bad("n0 must be at least 1".into());
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlannerKind {
    NaiveRandomTree,
    Rrt,
    RrtBestNear,
    Sst,
    SstStar,
    RrtStar,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 6] = [
        PlannerKind::NaiveRandomTree,
        PlannerKind::Rrt,
        PlannerKind::RrtBestNear,
        PlannerKind::Sst,
        PlannerKind::SstStar,
        PlannerKind::RrtStar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::NaiveRandomTree => "naive",
            PlannerKind::Rrt => "rrt",
            PlannerKind::RrtBestNear => "rrt-bestnear",
            PlannerKind::Sst => "sst",
            PlannerKind::SstStar => "sst-star",
            PlannerKind::RrtStar => "rrt-star",
        }
    }

    fn uses_witnesses(self) -> bool {
        matches!(self, PlannerKind::Sst | PlannerKind::SstStar)
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Ok(match key.as_str() {
            "naive" | "naive-random-tree" => PlannerKind::NaiveRandomTree,
            "rrt" => PlannerKind::Rrt,
            "rrt-bestnear" | "rrt-best-near" => PlannerKind::RrtBestNear,
            "sst" => PlannerKind::Sst,
            "sst-star" | "sst*" | "sststar" => PlannerKind::SstStar,
            "rrt-star" | "rrt*" | "rrtstar" => PlannerKind::RrtStar,
            _ => return Err(Error::UnknownPlanner(s.to_string())),
        })
    }
}

/// Samples a duration uniformly on `(0, t_prop]`, rounded up to a multiple
/// of the integration step, and a control uniformly over the control box,
/// then integrates from `x_prop`. Collisions are not checked.
pub fn monte_carlo_prop<R: Rng + ?Sized>(
    system: &SystemModel,
    x_prop: &StateVector,
    t_prop: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    monte_carlo_prop_with(system, x_prop, t_prop, rng, &mut Rk4Workspace::new(x_prop.dim()))
}

pub(crate) fn monte_carlo_prop_with<R: Rng + ?Sized>(
    system: &SystemModel,
    x_prop: &[f64],
    t_prop: f64,
    rng: &mut R,
    ws: &mut Rk4Workspace,
) -> Result<Trajectory> {
    let duration = sample_duration(t_prop, system.dt, rng);
    let control: ControlInput = system.sample_control(rng);
    propagate_with(system, x_prop, &PiecewiseControl::constant(control, duration), system.dt, ws)
}

pub(crate) fn sample_duration<R: Rng + ?Sized>(t_prop: f64, dt: f64, rng: &mut R) -> f64 {
    let t = t_prop * (1.0 - rng.gen::<f64>());
    let steps = ((t / dt) * (1.0 - 1e-12)).ceil().max(1.0);
    steps * dt
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct SprintState {
    index: u32,
    remaining: u64,
}

/// An in-progress planner run.
pub struct Planner<'a, R = ChaCha8Rng> {
    kind: PlannerKind,
    system: &'a SystemModel,
    env: &'a Environment,
    config: PlannerConfig,
    tree: PlannerTree,
    rng: R,
    iterations: u64,
    delta_s: f64,
    delta_bn: f64,
    sprint: Option<SprintState>,
    goal_nodes: Vec<usize>,
    ws: Rk4Workspace,
}

impl<'a> Planner<'a, ChaCha8Rng> {
    /// A fresh run seeded from `config.seed`.
    pub fn new(
        kind: PlannerKind,
        system: &'a SystemModel,
        env: &'a Environment,
        config: PlannerConfig,
    ) -> Result<Self> {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Planner::with_rng(kind, system, env, config, rng, None)
    }
}

impl<'a, R: Rng> Planner<'a, R> {
    /// A run drawing from `rng`, optionally continuing an existing tree.
    pub fn with_rng(
        kind: PlannerKind,
        system: &'a SystemModel,
        env: &'a Environment,
        config: PlannerConfig,
        rng: R,
        existing: Option<PlannerTree>,
    ) -> Result<Self> {
        config.validate(system)?;
        if kind == PlannerKind::SstStar && config.sststar.is_none() {
            return Err(Error::InvalidConfig("sst-star needs xi and n0".into()));
        }
        if kind == PlannerKind::RrtStar && system.name() != "point2d" {
            return Err(Error::InvalidConfig(format!(
                "rrt-star steers in straight lines and only supports point2d, not {}",
                system.name()
            )));
        }
        if !env.state_valid(&env.start) {
            return Err(Error::InvalidConfig("start state is in collision".into()));
        }
        let tree = match existing {
            Some(tree) => {
                if kind.uses_witnesses() && tree.witnesses().is_empty() && tree.len() > 1 {
                    return Err(Error::InvalidConfig(
                        "cannot continue a tree that has no witnesses".into(),
                    ));
                }
                tree
            }
            None => PlannerTree::new(system, env.start.clone(), config.seed),
        };
        let mut planner = Self {
            kind,
            system,
            env,
            delta_s: config.delta_s,
            delta_bn: config.delta_bn,
            sprint: config.sststar.filter(|_| kind == PlannerKind::SstStar).map(|p| SprintState {
                index: 0,
                remaining: p.n0,
            }),
            config,
            tree,
            rng,
            iterations: 0,
            goal_nodes: Vec::new(),
            ws: Rk4Workspace::new(system.state_dim()),
        };
        if kind.uses_witnesses() && planner.tree.witnesses().is_empty() {
            let root = planner.tree.root().state.clone();
            let w = planner.tree.add_witness(root);
            planner.tree.witness_mut(w).rep = Some(0);
        }
        if env.in_goal(&env.start) && planner.tree.best_solution().is_none() {
            planner.tree.offer_solution(0);
            planner.goal_nodes.push(0);
        }
        Ok(planner)
    }

    pub fn kind(&self) -> PlannerKind {
        self.kind
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.config
    }

    pub fn tree(&self) -> &PlannerTree {
        &self.tree
    }

    pub fn into_tree(self) -> PlannerTree {
        self.tree
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// Current `(delta_s, delta_bn)`; they shrink between SST* sprints.
    pub fn radii(&self) -> (f64, f64) {
        (self.delta_s, self.delta_bn)
    }

    /// Index of the running SST* sprint.
    pub fn sprint_index(&self) -> Option<u32> {
        self.sprint.map(|s| s.index)
    }

    /// Runs `n` more iterations.
    pub fn run(&mut self, n: u64) {
        for _ in 0..n {
            self.step();
        }
    }

    /// One iteration of the selected planner.
    pub fn step(&mut self) {
        match self.kind {
            PlannerKind::NaiveRandomTree => self.step_naive(),
            PlannerKind::Rrt => self.step_rrt(),
            PlannerKind::RrtBestNear => self.step_best_near(),
            PlannerKind::Sst => self.step_sst(),
            PlannerKind::SstStar => {
                self.advance_sprint();
                self.step_sst();
            }
            PlannerKind::RrtStar => self.step_rrt_star(),
        }
        self.iterations += 1;
    }

    fn advance_sprint(&mut self) {
        let params = self.config.sststar.expect("validated");
        let sprint = self.sprint.as_mut().expect("sst-star state");
        if sprint.remaining == 0 {
            sprint.index += 1;
            self.delta_s *= params.xi;
            self.delta_bn *= params.xi;
            sprint.remaining = sprint_length(
                sprint.index,
                params.xi,
                params.n0,
                self.system.state_dim(),
                self.system.control_dim(),
            );
        }
        sprint.remaining -= 1;
    }

    /// Propagates from `from` with a random control and duration; the
    /// result is returned only when it is finite and collision-free.
    fn extend(&mut self, from: usize) -> Option<Trajectory> {
        let x = &self.tree.get(from).state;
        let traj =
            monte_carlo_prop_with(self.system, x, self.config.t_prop, &mut self.rng, &mut self.ws)
                .ok()?;
        self.env.collision_free(&traj).then_some(traj)
    }

    fn attach(&mut self, parent: usize, traj: Trajectory) -> usize {
        let cost = self.tree.get(parent).cost_from_root + traj.cost;
        let edge = traj.control.segments()[0].clone();
        let state = StateVector::from(traj.final_state());
        let id = self.tree.insert(state, Some(parent), Some(edge), cost);
        self.note_goal(id);
        id
    }

    fn note_goal(&mut self, id: usize) {
        if self.env.in_goal(&self.tree.get(id).state) {
            self.goal_nodes.push(id);
            self.tree.offer_solution(id);
        }
    }
}
