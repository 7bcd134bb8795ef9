//! Benchmark system models, distance functions and obstacle environments.

pub mod constants;
mod env;
pub mod models;

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::Rng;

use crate::dynamics::{ControlInput, StateVector};
use crate::error::{Error, Result};
use crate::nn::Distance;

pub use env::{
    builtin_environment, collision_free, Environment, EnvironmentFile, GoalRegion, Obstacle,
    WorkspaceMap, BUILTIN_ENVIRONMENTS,
};

/// Names accepted by [`make_system`].
pub const SYSTEM_NAMES: [&str; 7] = [
    "point2d",
    "rigid3d",
    "pendulum",
    "cartpole",
    "acrobot",
    "quadrotor",
    "airplane",
];

/// Maps an angle to (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        PI
    } else {
        r
    }
}

pub type DynamicsFn = fn(&[f64], &[f64], &mut [f64]);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateBound {
    pub lo: f64,
    pub hi: f64,
    /// Angular coordinate living on (-π, π].
    pub wrap: bool,
}

impl StateBound {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, wrap: false }
    }

    pub fn angle() -> Self {
        Self {
            lo: -PI,
            hi: PI,
            wrap: true,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.wrap || (v >= self.lo && v <= self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.lo + (self.hi - self.lo) * rng.gen::<f64>()
    }
}

/// State-space distance functions.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    /// Euclidean, taking the short arc on flagged angular coordinates.
    Euclidean { wrap: Vec<bool> },
    /// Position plus weighted orientation; coordinates 0..3 are position and
    /// 3..6 are angles. Velocities are ignored.
    Se3 { rotation_weight: f64 },
    /// Euclidean over a subset of coordinates.
    Position { dims: Vec<usize> },
}

impl Metric {
    pub fn euclidean(dim: usize) -> Self {
        Metric::Euclidean {
            wrap: vec![false; dim],
        }
    }
}

impl Distance for Metric {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean { wrap } => a
                .iter()
                .zip(b)
                .zip(wrap)
                .map(|((x, y), &w)| {
                    let d = if w { wrap_angle(x - y) } else { x - y };
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            Metric::Se3 { rotation_weight } => {
                let lin: f64 = (0..3).map(|i| (a[i] - b[i]).powi(2)).sum();
                let rot: f64 = (3..6).map(|i| wrap_angle(a[i] - b[i]).powi(2)).sum();
                (lin + rotation_weight * rotation_weight * rot).sqrt()
            }
            Metric::Position { dims } => dims
                .iter()
                .map(|&i| (a[i] - b[i]).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// Radii and propagation horizon used with a system unless overridden.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerDefaults {
    pub delta_s: f64,
    pub delta_bn: f64,
    pub t_prop: f64,
}

/// Everything a planner needs to know about a dynamical system.
#[derive(Clone)]
pub struct SystemModel {
    name: String,
    state_bounds: Vec<StateBound>,
    control_bounds: Vec<Interval>,
    dynamics: DynamicsFn,
    metric: Metric,
    /// Integration resolution, seconds.
    pub dt: f64,
    pub defaults: PlannerDefaults,
}

impl fmt::Debug for SystemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemModel")
            .field("name", &self.name)
            .field("state_bounds", &self.state_bounds)
            .field("control_bounds", &self.control_bounds)
            .field("metric", &self.metric)
            .field("dt", &self.dt)
            .finish_non_exhaustive()
    }
}

impl SystemModel {
    pub fn new(
        name: impl Into<String>,
        state_bounds: Vec<StateBound>,
        control_bounds: Vec<Interval>,
        dynamics: DynamicsFn,
        metric: Metric,
        dt: f64,
        defaults: PlannerDefaults,
    ) -> Self {
        Self {
            name: name.into(),
            state_bounds,
            control_bounds,
            dynamics,
            metric,
            dt,
            defaults,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_dim(&self) -> usize {
        self.state_bounds.len()
    }

    pub fn control_dim(&self) -> usize {
        self.control_bounds.len()
    }

    pub fn state_bounds(&self) -> &[StateBound] {
        &self.state_bounds
    }

    pub fn control_bounds(&self) -> &[Interval] {
        &self.control_bounds
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_state_bounds(mut self, bounds: Vec<StateBound>) -> Self {
        assert_eq!(bounds.len(), self.state_bounds.len());
        self.state_bounds = bounds;
        self
    }

    pub fn with_control_bounds(mut self, bounds: Vec<Interval>) -> Self {
        assert_eq!(bounds.len(), self.control_bounds.len());
        self.control_bounds = bounds;
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    /// Writes `f(x, u)` into `dx`.
    #[inline]
    pub fn derivative(&self, x: &[f64], u: &[f64], dx: &mut [f64]) {
        (self.dynamics)(x, u, dx)
    }

    pub fn dynamics(&self, x: &StateVector, u: &ControlInput) -> StateVector {
        let mut dx = vec![0.0; self.state_dim()];
        self.derivative(x, u, &mut dx);
        StateVector(dx)
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.metric.distance(a, b)
    }

    /// Wraps angular coordinates to (-π, π]; values already in range are
    /// left bit-identical.
    pub fn wrap_in_place(&self, x: &mut [f64]) {
        for (v, b) in x.iter_mut().zip(&self.state_bounds) {
            if b.wrap && (*v > PI || *v <= -PI) {
                *v = wrap_angle(*v);
            }
        }
    }

    /// Inside the box on every non-angular coordinate.
    pub fn in_bounds(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.state_bounds).all(|(&v, b)| b.contains(v))
    }

    pub fn control_in_bounds(&self, u: &[f64]) -> bool {
        u.iter()
            .zip(&self.control_bounds)
            .all(|(&v, b)| v >= b.lo && v <= b.hi)
    }

    /// Uniform sample over the state bounds.
    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> StateVector {
        StateVector(self.sample_state_raw(rng))
    }

    pub(crate) fn sample_state_raw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.state_bounds
            .iter()
            .map(|b| {
                let v = b.lo + (b.hi - b.lo) * rng.gen::<f64>();
                if b.wrap {
                    wrap_angle(v)
                } else {
                    v
                }
            })
            .collect()
    }

    /// Uniform sample over the control box.
    pub fn sample_control<R: Rng + ?Sized>(&self, rng: &mut R) -> ControlInput {
        ControlInput(self.control_bounds.iter().map(|b| b.sample(rng)).collect())
    }

    pub(crate) fn perturb_control<R: Rng + ?Sized>(
        &self,
        u: &[f64],
        scale: f64,
        rng: &mut R,
    ) -> Vec<f64> {
        u.iter()
            .zip(&self.control_bounds)
            .map(|(&v, b)| {
                let h = scale * (b.hi - b.lo).max(1.0);
                (v + h * (2.0 * rng.gen::<f64>() - 1.0)).clamp(b.lo, b.hi)
            })
            .collect()
    }

    pub(crate) fn perturb_state<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        scale: f64,
        rng: &mut R,
    ) -> Vec<f64> {
        x.iter()
            .zip(&self.state_bounds)
            .map(|(&v, b)| {
                let h = scale * b.width().max(1.0);
                (v + h * (2.0 * rng.gen::<f64>() - 1.0)).clamp(b.lo, b.hi)
            })
            .collect()
    }

    pub(crate) fn check_state_dim(&self, got: usize) -> Result<()> {
        check_dim(self.state_dim(), got)
    }

    pub(crate) fn check_control_dim(&self, got: usize) -> Result<()> {
        check_dim(self.control_dim(), got)
    }

    /// Lebesgue measure of the state bounds.
    pub fn state_volume(&self) -> f64 {
        self.state_bounds.iter().map(StateBound::width).product()
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn symmetric(n: usize, half: f64) -> Vec<StateBound> {
    vec![StateBound::new(-half, half); n]
}

/// Builds one of the named benchmark systems.
pub fn make_system(name: &str) -> Result<SystemModel> {
    use constants as c;
    let model = match name {
        "point2d" => SystemModel::new(
            name,
            symmetric(2, c::point::EXTENT),
            vec![Interval::new(0.0, c::point::SPEED_MAX), Interval::new(-PI, PI)],
            models::point,
            Metric::euclidean(2),
            c::point::DT,
            PlannerDefaults {
                delta_s: c::point::DELTA_S,
                delta_bn: c::point::DELTA_BN,
                t_prop: c::point::T_PROP,
            },
        ),
        "rigid3d" => {
            let mut bounds = symmetric(3, c::rigid_body::EXTENT);
            bounds.extend([StateBound::angle(); 3]);
            let lin = c::rigid_body::LINEAR_SPEED_MAX;
            let ang = c::rigid_body::ANGULAR_SPEED_MAX;
            let mut controls = vec![Interval::new(-lin, lin); 3];
            controls.extend([Interval::new(-ang, ang); 3]);
            SystemModel::new(
                name,
                bounds,
                controls,
                models::rigid_body,
                Metric::Euclidean {
                    wrap: vec![false, false, false, true, true, true],
                },
                c::rigid_body::DT,
                PlannerDefaults {
                    delta_s: c::rigid_body::DELTA_S,
                    delta_bn: c::rigid_body::DELTA_BN,
                    t_prop: c::rigid_body::T_PROP,
                },
            )
        }
        "pendulum" => {
            let w = c::pendulum::OMEGA_MAX;
            let t = c::pendulum::TORQUE_MAX;
            SystemModel::new(
                name,
                vec![StateBound::angle(), StateBound::new(-w, w)],
                vec![Interval::new(-t, t)],
                models::pendulum,
                Metric::Euclidean {
                    wrap: vec![true, false],
                },
                c::pendulum::DT,
                PlannerDefaults {
                    delta_s: c::pendulum::DELTA_S,
                    delta_bn: c::pendulum::DELTA_BN,
                    t_prop: c::pendulum::T_PROP,
                },
            )
        }
        "cartpole" => {
            use c::cartpole::*;
            SystemModel::new(
                name,
                vec![
                    StateBound::new(-X_MAX, X_MAX),
                    StateBound::angle(),
                    StateBound::new(-V_MAX, V_MAX),
                    StateBound::new(-OMEGA_MAX, OMEGA_MAX),
                ],
                vec![Interval::new(-FORCE_MAX, FORCE_MAX)],
                models::cartpole,
                Metric::Euclidean {
                    wrap: vec![false, true, false, false],
                },
                DT,
                PlannerDefaults {
                    delta_s: DELTA_S,
                    delta_bn: DELTA_BN,
                    t_prop: T_PROP,
                },
            )
        }
        "acrobot" => {
            use c::acrobot::*;
            SystemModel::new(
                name,
                vec![
                    StateBound::angle(),
                    StateBound::angle(),
                    StateBound::new(-OMEGA_MAX, OMEGA_MAX),
                    StateBound::new(-OMEGA_MAX, OMEGA_MAX),
                ],
                vec![Interval::new(-TORQUE_MAX, TORQUE_MAX)],
                models::acrobot,
                Metric::Euclidean {
                    wrap: vec![true, true, false, false],
                },
                DT,
                PlannerDefaults {
                    delta_s: DELTA_S,
                    delta_bn: DELTA_BN,
                    t_prop: T_PROP,
                },
            )
        }
        "quadrotor" => {
            use c::quadrotor::*;
            let mut bounds = symmetric(3, EXTENT);
            bounds.extend([StateBound::angle(); 3]);
            bounds.extend(symmetric(3, VELOCITY_MAX));
            bounds.extend(symmetric(3, RATE_MAX));
            SystemModel::new(
                name,
                bounds,
                vec![Interval::new(THRUST_MIN, THRUST_MAX); 4],
                models::quadrotor,
                Metric::Se3 {
                    rotation_weight: ROTATION_WEIGHT,
                },
                DT,
                PlannerDefaults {
                    delta_s: DELTA_S,
                    delta_bn: DELTA_BN,
                    t_prop: T_PROP,
                },
            )
        }
        "airplane" => {
            use c::airplane::*;
            SystemModel::new(
                name,
                vec![
                    StateBound::new(-XY_EXTENT, XY_EXTENT),
                    StateBound::new(-XY_EXTENT, XY_EXTENT),
                    StateBound::new(0.0, Z_MAX),
                    StateBound::new(SPEED_MIN, SPEED_MAX),
                    StateBound::new(-FLIGHT_PATH_MAX, FLIGHT_PATH_MAX),
                    StateBound::new(-BANK_MAX, BANK_MAX),
                    StateBound::angle(),
                    StateBound::new(-BANK_RATE_MAX, BANK_RATE_MAX),
                    StateBound::new(0.0, THRUST_MAX),
                ],
                vec![
                    Interval::new(0.0, THRUST_MAX),
                    Interval::new(-FLIGHT_PATH_CMD_MAX, FLIGHT_PATH_CMD_MAX),
                    Interval::new(-BANK_CMD_MAX, BANK_CMD_MAX),
                ],
                models::airplane,
                Metric::Position {
                    dims: vec![0, 1, 2],
                },
                DT,
                PlannerDefaults {
                    delta_s: DELTA_S,
                    delta_bn: DELTA_BN,
                    t_prop: T_PROP,
                },
            )
        }
        other => return Err(Error::UnknownSystem(other.to_string())),
    };
    Ok(model)
}

/// Free-function form of [`SystemModel::sample_state`].
pub fn sample_state<R: Rng + ?Sized>(system: &SystemModel, rng: &mut R) -> StateVector {
    system.sample_state(rng)
}

/// Free-function form of [`SystemModel::distance`].
pub fn distance(system: &SystemModel, a: &[f64], b: &[f64]) -> f64 {
    system.distance(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn table_dimensions() {
        let dims = [
            ("point2d", 2, 2),
            ("rigid3d", 6, 6),
            ("pendulum", 2, 1),
            ("acrobot", 4, 1),
            ("cartpole", 4, 1),
            ("quadrotor", 12, 4),
            ("airplane", 9, 3),
        ];
        for (name, d, l) in dims {
            let s = make_system(name).unwrap();
            assert_eq!((s.state_dim(), s.control_dim()), (d, l), "{name}");
        }
    }

    #[test]
    fn table_radii() {
        let radii = [
            ("point2d", 0.5, 1.0),
            ("rigid3d", 2.0, 4.0),
            ("pendulum", 0.2, 0.3),
            ("acrobot", 0.5, 1.0),
            ("cartpole", 1.0, 2.0),
            ("quadrotor", 3.0, 5.0),
            ("airplane", 2.0, 6.0),
        ];
        for (name, ds, dbn) in radii {
            let s = make_system(name).unwrap();
            assert_eq!((s.defaults.delta_s, s.defaults.delta_bn), (ds, dbn), "{name}");
        }
    }

    #[test]
    fn unknown_system() {
        assert!(matches!(make_system("unicycle"), Err(Error::UnknownSystem(_))));
    }

    #[test]
    fn pendulum_equilibrium() {
        let p = make_system("pendulum").unwrap();
        let dx = p.dynamics(&[FRAC_PI_2, 0.0].into(), &[0.0].into());
        assert_eq!(dx[0], 0.0);
        assert!(dx[1].abs() < 1e-14);
    }

    #[test]
    fn pendulum_equation() {
        let p = make_system("pendulum").unwrap();
        let dx = p.dynamics(&[0.3, 1.5].into(), &[0.7].into());
        assert_eq!(dx[0], 1.5);
        let expected = (0.7 - 9.81 * 0.3f64.cos() * 0.5) * 3.0;
        assert!((dx[1] - expected).abs() < 1e-14);
    }

    #[test]
    fn hanging_equilibria() {
        let cp = make_system("cartpole").unwrap();
        let dx = cp.dynamics(&[0.0; 4].into(), &[0.0].into());
        assert!(dx.iter().all(|v| v.abs() < 1e-12));
        let ac = make_system("acrobot").unwrap();
        let dx = ac.dynamics(&[0.0; 4].into(), &[0.0].into());
        assert!(dx.iter().all(|v| v.abs() < 1e-12), "{dx:?}");
    }

    #[test]
    fn quadrotor_hover() {
        let q = make_system("quadrotor").unwrap();
        let hover = constants::quadrotor::MASS * constants::GRAVITY / 4.0;
        let dx = q.dynamics(&[0.0; 12].into(), &[hover; 4].into());
        assert!(dx.iter().all(|v| v.abs() < 1e-12), "{dx:?}");
    }

    #[test]
    fn point_distance() {
        let p = make_system("point2d").unwrap();
        assert_eq!(p.distance(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn wrapped_distance() {
        let p = make_system("pendulum").unwrap();
        let d = p.distance(&[PI - 0.1, 1.0], &[-PI + 0.1, 1.0]);
        assert!((d - 0.2).abs() < 1e-12, "{d}");
    }

    #[test]
    fn airplane_distance_ignores_attitude() {
        let a = make_system("airplane").unwrap();
        let x = [1.0, 2.0, 3.0, 5.0, 0.1, 0.2, 0.3, 0.4, 5.0];
        let y = [1.0, 2.0, 3.0, 9.0, -0.1, -0.3, 2.0, -1.0, 1.0];
        assert_eq!(a.distance(&x, &y), 0.0);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI + 0.5) - (-PI + 0.5)).abs() < 1e-12);
        assert!((wrap_angle(0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn degenerate_bound_sampling() {
        let p = make_system("point2d")
            .unwrap()
            .with_state_bounds(vec![StateBound::new(3.0, 3.0), StateBound::new(0.0, 1.0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(p.sample_state(&mut rng)[0], 3.0);
        }
    }

    #[test]
    fn seeded_sampling_repeats() {
        let p = make_system("quadrotor").unwrap();
        let a: Vec<_> = {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            (0..20).map(|_| p.sample_state(&mut rng)).collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b: Vec<_> = (0..20).map(|_| p.sample_state(&mut rng)).collect();
        assert_eq!(a, b);
    }
}
