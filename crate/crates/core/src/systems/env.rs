use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{make_system, Metric, StateBound, SystemModel};
use crate::dynamics::{StateVector, Trajectory};
use crate::error::{Error, Result};
use crate::nn::Distance;

/// On-disk environment description. See `envs/` for the shipped files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentFile {
    pub name: String,
    pub system: String,
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
    pub goal_radius: f64,
    #[serde(default)]
    pub workspace: Option<WorkspaceMap>,
    #[serde(default, rename = "obstacle")]
    pub obstacles: Vec<Obstacle>,
}

/// How a state is mapped to the workspace points that must avoid obstacles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorkspaceMap {
    /// The selected state coordinates are a single workspace point.
    Projection { dims: Vec<usize> },
    /// Cart at `(x, 0)` with a pole of `length` hanging at angle θ
    /// (θ = 0 straight down), checked at `samples` points along the pole.
    Pole {
        cart: usize,
        angle: usize,
        length: f64,
        samples: usize,
    },
}

impl WorkspaceMap {
    pub fn dim(&self) -> usize {
        match self {
            WorkspaceMap::Projection { dims } => dims.len(),
            WorkspaceMap::Pole { .. } => 2,
        }
    }

    /// Calls `f` on each workspace point of `x`; stops early when `f` is false.
    fn all_points(&self, x: &[f64], mut f: impl FnMut(&[f64]) -> bool) -> bool {
        match self {
            WorkspaceMap::Projection { dims } => {
                let mut p = [0.0; 3];
                for (slot, &d) in p.iter_mut().zip(dims) {
                    *slot = x[d];
                }
                f(&p[..dims.len()])
            }
            WorkspaceMap::Pole {
                cart,
                angle,
                length,
                samples,
            } => {
                let (s, c) = x[*angle].sin_cos();
                if !f(&[x[*cart], 0.0]) {
                    return false;
                }
                (1..=*samples).all(|i| {
                    let r = length * i as f64 / *samples as f64;
                    f(&[x[*cart] + r * s, -r * c])
                })
            }
        }
    }
}

/// Workspace obstacle primitives. Boundaries count as inside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Obstacle {
    /// Axis-aligned box.
    Box { min: Vec<f64>, max: Vec<f64> },
    Sphere { center: Vec<f64>, radius: f64 },
    /// Vertical cylinder in a 3-D workspace.
    Cylinder {
        center: [f64; 2],
        radius: f64,
        z_min: f64,
        z_max: f64,
    },
}

impl Obstacle {
    pub fn dim(&self) -> usize {
        match self {
            Obstacle::Box { min, .. } => min.len(),
            Obstacle::Sphere { center, .. } => center.len(),
            Obstacle::Cylinder { .. } => 3,
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            Obstacle::Box { min, max } => p
                .iter()
                .zip(min.iter().zip(max))
                .all(|(v, (lo, hi))| v >= lo && v <= hi),
            Obstacle::Sphere { center, radius } => {
                p.iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    <= radius * radius
            }
            Obstacle::Cylinder {
                center,
                radius,
                z_min,
                z_max,
            } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                p[2] >= *z_min && p[2] <= *z_max && dx * dx + dy * dy <= radius * radius
            }
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match self {
            Obstacle::Box { min, max } => {
                if min.len() != max.len() {
                    return Err("box min/max lengths differ".into());
                }
                if min.iter().zip(max).any(|(a, b)| a > b) {
                    return Err("box min exceeds max".into());
                }
            }
            Obstacle::Sphere { radius, .. } | Obstacle::Cylinder { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err("radius must be positive".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoalRegion {
    pub center: StateVector,
    pub radius: f64,
}

/// An obstacle map bound to one system: start, goal ball, obstacles and the
/// system's state bounds and metric.
#[derive(Clone, Debug)]
pub struct Environment {
    pub name: String,
    pub system: String,
    pub start: StateVector,
    pub goal: GoalRegion,
    pub obstacles: Vec<Obstacle>,
    pub workspace: Option<WorkspaceMap>,
    bounds: Vec<StateBound>,
    metric: Metric,
}

impl Environment {
    pub fn from_file(file: EnvironmentFile, system: &SystemModel) -> Result<Self> {
        let fail = |message: String| Error::InvalidConfig(format!("environment `{}`: {message}", file.name));
        if file.system != system.name() {
            return Err(fail(format!(
                "declared for system `{}`, used with `{}`",
                file.system,
                system.name()
            )));
        }
        let d = system.state_dim();
        if file.start.len() != d || file.goal.len() != d {
            return Err(fail(format!("start and goal must have {d} coordinates")));
        }
        if !(file.goal_radius > 0.0) {
            return Err(fail("goal_radius must be positive".into()));
        }
        if !file.obstacles.is_empty() && file.workspace.is_none() {
            return Err(fail("obstacles require a workspace mapping".into()));
        }
        if let Some(ws) = &file.workspace {
            let in_range = match ws {
                WorkspaceMap::Projection { dims } => {
                    !dims.is_empty() && dims.len() <= 3 && dims.iter().all(|&i| i < d)
                }
                WorkspaceMap::Pole {
                    cart,
                    angle,
                    length,
                    samples,
                } => *cart < d && *angle < d && *length > 0.0 && *samples > 0,
            };
            if !in_range {
                return Err(fail("workspace mapping out of range".into()));
            }
            for o in &file.obstacles {
                o.validate().map_err(&fail)?;
                if o.dim() != ws.dim() {
                    return Err(fail(format!(
                        "obstacle dimension {} does not match workspace dimension {}",
                        o.dim(),
                        ws.dim()
                    )));
                }
            }
        }
        let env = Environment {
            name: file.name.clone(),
            system: file.system.clone(),
            start: StateVector(file.start),
            goal: GoalRegion {
                center: StateVector(file.goal),
                radius: file.goal_radius,
            },
            obstacles: file.obstacles,
            workspace: file.workspace,
            bounds: system.state_bounds().to_vec(),
            metric: system.metric().clone(),
        };
        if !env.state_valid(&env.start) {
            return Err(fail("start state is in collision or out of bounds".into()));
        }
        Ok(env)
    }

    pub fn parse(text: &str, system: &SystemModel) -> Result<Self> {
        let file: EnvironmentFile = toml::from_str(text).map_err(|e| Error::EnvironmentParse {
            path: "<inline>".into(),
            message: e.to_string(),
        })?;
        Self::from_file(file, system)
    }

    /// Reads an environment file; the system is taken from its `system` key.
    pub fn load(path: &Path) -> Result<(SystemModel, Self)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::EnvironmentParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let file: EnvironmentFile = toml::from_str(&text).map_err(|e| Error::EnvironmentParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let system = make_system(&file.system)?;
        let env = Self::from_file(file, &system)?;
        Ok((system, env))
    }

    /// An environment with no obstacles over the given system's bounds.
    pub fn open(system: &SystemModel, start: StateVector, goal: StateVector, radius: f64) -> Result<Self> {
        Self::from_file(
            EnvironmentFile {
                name: format!("{}_open", system.name()),
                system: system.name().to_string(),
                start: start.0,
                goal: goal.0,
                goal_radius: radius,
                workspace: None,
                obstacles: Vec::new(),
            },
            system,
        )
    }

    pub fn to_file(&self) -> EnvironmentFile {
        EnvironmentFile {
            name: self.name.clone(),
            system: self.system.clone(),
            start: self.start.0.clone(),
            goal: self.goal.center.0.clone(),
            goal_radius: self.goal.radius,
            workspace: self.workspace.clone(),
            obstacles: self.obstacles.clone(),
        }
    }

    pub fn bounds(&self) -> &[StateBound] {
        &self.bounds
    }

    /// Inside the state bounds and clear of every obstacle.
    pub fn state_valid(&self, x: &[f64]) -> bool {
        let in_bounds = x.iter().zip(&self.bounds).all(|(&v, b)| b.contains(v));
        if !in_bounds {
            return false;
        }
        match &self.workspace {
            None => true,
            Some(ws) => ws.all_points(x, |p| !self.obstacles.iter().any(|o| o.contains(p))),
        }
    }

    /// Every stored sample of the trajectory is valid.
    pub fn collision_free(&self, traj: &Trajectory) -> bool {
        traj.states().all(|x| self.state_valid(x))
    }

    pub fn in_goal(&self, x: &[f64]) -> bool {
        self.metric.distance(x, &self.goal.center) <= self.goal.radius
    }

    pub fn goal_distance(&self, x: &[f64]) -> f64 {
        self.metric.distance(x, &self.goal.center)
    }
}

/// Free-function form of [`Environment::collision_free`].
pub fn collision_free(env: &Environment, traj: &Trajectory) -> bool {
    env.collision_free(traj)
}

/// Shipped environments as `(name, toml source)`.
pub const BUILTIN_ENVIRONMENTS: [(&str, &str); 7] = [
    ("point_maze", include_str!("../../envs/point_maze.toml")),
    ("rigid_boxes", include_str!("../../envs/rigid_boxes.toml")),
    ("pendulum_free", include_str!("../../envs/pendulum_free.toml")),
    ("cartpole_rail", include_str!("../../envs/cartpole_rail.toml")),
    ("acrobot_free", include_str!("../../envs/acrobot_free.toml")),
    ("quadrotor_windows", include_str!("../../envs/quadrotor_windows.toml")),
    ("airplane_forest", include_str!("../../envs/airplane_forest.toml")),
];

/// Looks up a shipped environment by its name or by its system's name.
pub fn builtin_environment(name: &str) -> Result<(SystemModel, Environment)> {
    for (env_name, text) in BUILTIN_ENVIRONMENTS {
        let file: EnvironmentFile = toml::from_str(text).map_err(|e| Error::EnvironmentParse {
            path: format!("envs/{env_name}.toml").into(),
            message: e.to_string(),
        })?;
        if env_name == name || file.system == name {
            let system = make_system(&file.system)?;
            let env = Environment::from_file(file, &system)?;
            return Ok((system, env));
        }
    }
    Err(Error::UnknownEnvironment(name.to_string()))
}
