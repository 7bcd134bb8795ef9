//! State, control and trajectory types together with the forward-integration
//! primitives every planner is built on.
//!
//! Systems are modeled as `ẋ = f(x, u)` and only ever accessed through forward
//! propagation: a fixed-step fourth-order Runge-Kutta integrator applied to a
//! piecewise-constant control.

use std::ops::{Deref, DerefMut};

use rand::Rng;

use crate::error::{Error, Result};
use crate::systems::{wrap_angle, SystemModel};

/// A point in the state space of a system.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StateVector(pub Vec<f64>);

/// A control input held constant over a propagation segment.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ControlInput(pub Vec<f64>);

macro_rules! vector_newtype {
    ($name:ident) => {
        impl $name {
            pub fn new(values: Vec<f64>) -> Self {
                Self(values)
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(values: Vec<f64>) -> Self {
                Self(values)
            }
        }

        impl From<&[f64]> for $name {
            fn from(values: &[f64]) -> Self {
                Self(values.to_vec())
            }
        }

        impl<const N: usize> From<[f64; N]> for $name {
            fn from(values: [f64; N]) -> Self {
                Self(values.to_vec())
            }
        }
    };
}

vector_newtype!(StateVector);
vector_newtype!(ControlInput);

/// One constant-control piece of a [`PiecewiseControl`].
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSegment {
    pub control: ControlInput,
    /// Seconds, strictly positive.
    pub duration: f64,
}

/// A concatenation of constant controls.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PiecewiseControl {
    segments: Vec<ControlSegment>,
}

impl PiecewiseControl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(control: ControlInput, duration: f64) -> Self {
        let mut pc = Self::new();
        pc.push(control, duration);
        pc
    }

    pub fn push(&mut self, control: ControlInput, duration: f64) {
        self.segments.push(ControlSegment { control, duration });
    }

    pub fn extend(&mut self, other: &PiecewiseControl) {
        self.segments.extend(other.segments.iter().cloned());
    }

    pub fn segments(&self) -> &[ControlSegment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    /// Sum of segment durations, accumulated left to right.
    pub fn duration(&self) -> f64 {
        self.segments.iter().fold(0.0, |acc, s| acc + s.duration)
    }
}

/// A forward-propagated path. States are stored flat and sampled every `dt`
/// (plus a final partial step when a segment is not a multiple of `dt`),
/// starting with the initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    dim: usize,
    states: Vec<f64>,
    pub control: PiecewiseControl,
    pub duration: f64,
    pub cost: f64,
}

impl Trajectory {
    /// A zero-duration trajectory sitting at `x0`.
    pub fn at(x0: &[f64]) -> Self {
        Self {
            dim: x0.len(),
            states: x0.to_vec(),
            control: PiecewiseControl::new(),
            duration: 0.0,
            cost: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.states.chunks_exact(self.dim)
    }

    pub fn initial_state(&self) -> &[f64] {
        self.state(0)
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Keeps the first `n` samples. Duration and cost are not adjusted.
    pub fn truncated(&self, n: usize) -> Trajectory {
        let n = n.clamp(1, self.len());
        Trajectory {
            dim: self.dim,
            states: self.states[..n * self.dim].to_vec(),
            control: self.control.clone(),
            duration: self.duration,
            cost: self.cost,
        }
    }

    /// `self | other`; `other` must start where `self` ends.
    pub fn concat(&self, other: &Trajectory) -> Trajectory {
        debug_assert_eq!(self.dim, other.dim);
        let mut states = self.states.clone();
        states.extend_from_slice(&other.states[other.dim..]);
        let mut control = self.control.clone();
        control.extend(&other.control);
        Trajectory {
            dim: self.dim,
            states,
            control,
            duration: self.duration + other.duration,
            cost: self.cost + other.cost,
        }
    }
}

/// Trajectory cost functionals. Only duration is used by the experiments.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CostFunctional {
    #[default]
    Duration,
}

impl CostFunctional {
    pub fn evaluate(&self, traj: &Trajectory) -> f64 {
        match self {
            CostFunctional::Duration => traj.duration,
        }
    }

    /// Cost of holding a single control for `duration`.
    pub fn segment_cost(&self, duration: f64) -> f64 {
        match self {
            CostFunctional::Duration => duration,
        }
    }
}

/// Reusable RK4 buffers so the planners' inner loop does not allocate per step.
#[derive(Clone, Debug, Default)]
pub struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    pub fn new(dim: usize) -> Self {
        let z = vec![0.0; dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    fn resize(&mut self, dim: usize) {
        if self.k1.len() != dim {
            *self = Self::new(dim);
        }
    }

    /// Advances `x` in place by one RK4 step and wraps angular coordinates.
    pub fn step(&mut self, system: &SystemModel, x: &mut [f64], u: &[f64], dt: f64) {
        let n = x.len();
        self.resize(n);
        system.derivative(x, u, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * dt * self.k1[i];
        }
        system.derivative(&self.tmp, u, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * dt * self.k2[i];
        }
        system.derivative(&self.tmp, u, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = x[i] + dt * self.k3[i];
        }
        system.derivative(&self.tmp, u, &mut self.k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        system.wrap_in_place(x);
    }
}

/// One RK4 step of `ẋ = f(x, u)` under constant `u`.
pub fn integrate_step(
    system: &SystemModel,
    x: &StateVector,
    u: &ControlInput,
    dt: f64,
) -> Result<StateVector> {
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    system.check_state_dim(x.dim())?;
    system.check_control_dim(u.dim())?;
    let mut out = x.clone();
    Rk4Workspace::new(x.dim()).step(system, &mut out, u, dt);
    if !out.is_finite() {
        return Err(Error::IntegrationDivergence { step: 0, dt });
    }
    Ok(out)
}

/// Number of whole steps and the trailing partial step for a segment.
pub(crate) fn split_duration(duration: f64, dt: f64) -> (usize, f64) {
    let q = duration / dt;
    let k = q.round();
    if (q - k).abs() < 1e-9 * q.max(1.0) {
        (k as usize, 0.0)
    } else {
        let whole = q.floor();
        (whole as usize, duration - whole * dt)
    }
}

/// Forward-integrates `control` from `x0`, sampling every `dt`.
pub fn propagate(
    system: &SystemModel,
    x0: &[f64],
    control: &PiecewiseControl,
    dt: f64,
) -> Result<Trajectory> {
    propagate_with(system, x0, control, dt, &mut Rk4Workspace::new(x0.len()))
}

pub(crate) fn propagate_with(
    system: &SystemModel,
    x0: &[f64],
    control: &PiecewiseControl,
    dt: f64,
    ws: &mut Rk4Workspace,
) -> Result<Trajectory> {
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    if control.is_empty() {
        return Err(Error::InvalidConfig("empty control sequence".into()));
    }
    system.check_state_dim(x0.len())?;
    let dim = x0.len();
    let mut x = x0.to_vec();
    let mut states = Vec::with_capacity(dim * 16);
    states.extend_from_slice(&x);
    let mut step = 0usize;
    for seg in control.segments() {
        system.check_control_dim(seg.control.dim())?;
        if !(seg.duration > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "segment duration must be positive, got {}",
                seg.duration
            )));
        }
        let (whole, rest) = split_duration(seg.duration, dt);
        let substeps = (0..whole).map(|_| dt).chain((rest > 0.0).then_some(rest));
        for h in substeps {
            ws.step(system, &mut x, &seg.control, h);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::IntegrationDivergence { step, dt: h });
            }
            states.extend_from_slice(&x);
            step += 1;
        }
    }
    let duration = control.duration();
    Ok(Trajectory {
        dim,
        states,
        control: control.clone(),
        duration,
        cost: CostFunctional::Duration.segment_cost(duration),
    })
}

/// Lipschitz-type constants of a system's dynamics, estimated numerically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisConstants {
    /// `||f(x, u0) - f(x, u1)|| <= k_u ||u0 - u1||`
    pub k_u: f64,
    /// `||f(x0, u) - f(x1, u)|| <= k_x ||x0 - x1||`
    pub k_x: f64,
    /// Cost Lipschitz constant (1 for the duration functional).
    pub k_c: f64,
    /// Bound on the second time derivative of trajectories.
    pub m_2: f64,
}

impl AnalysisConstants {
    /// Maximum finite-difference ratios of `f` over `samples` random
    /// state/control pairs drawn inside the system bounds. Half the pairs are
    /// independent draws, half are small perturbations of one draw.
    pub fn estimate<R: Rng + ?Sized>(system: &SystemModel, samples: usize, rng: &mut R) -> Self {
        let d = system.state_dim();
        let mut f0 = vec![0.0; d];
        let mut f1 = vec![0.0; d];
        let (mut k_u, mut k_x, mut m_2) = (0.0f64, 0.0f64, 0.0f64);

        for i in 0..samples {
            let local = i % 2 == 1;
            let x0 = system.sample_state_raw(rng);
            let u0 = system.sample_control(rng).into_inner();

            let u1 = if local {
                system.perturb_control(&u0, 1e-4, rng)
            } else {
                system.sample_control(rng).into_inner()
            };
            let du = euclidean(&u0, &u1);
            if du > 0.0 {
                system.derivative(&x0, &u0, &mut f0);
                system.derivative(&x0, &u1, &mut f1);
                k_u = k_u.max(euclidean(&f0, &f1) / du);
            }

            let x1 = if local {
                system.perturb_state(&x0, 1e-4, rng)
            } else {
                system.sample_state_raw(rng)
            };
            let dx = euclidean(&x0, &x1);
            if dx > 0.0 {
                system.derivative(&x0, &u0, &mut f0);
                system.derivative(&x1, &u0, &mut f1);
                k_x = k_x.max(euclidean(&f0, &f1) / dx);
            }

            // ẍ = (∂f/∂x) f, by a directional difference along the flow.
            system.derivative(&x0, &u0, &mut f0);
            let speed = f0.iter().map(|v| v * v).sum::<f64>().sqrt();
            if speed > 0.0 {
                let h = 1e-6 / speed.max(1.0);
                let xh: Vec<f64> = x0.iter().zip(&f0).map(|(x, v)| x + h * v).collect();
                system.derivative(&xh, &u0, &mut f1);
                m_2 = m_2.max(euclidean(&f0, &f1) / h);
            }
        }
        Self {
            k_u,
            k_x,
            k_c: 1.0,
            m_2,
        }
    }

    pub fn with_margin(self, factor: f64) -> Self {
        Self {
            k_u: self.k_u * factor,
            k_x: self.k_x * factor,
            k_c: self.k_c * factor,
            m_2: self.m_2 * factor,
        }
    }

    /// `k_u · T · e^{k_x · T} · Δu`
    pub fn divergence_bound(&self, horizon: f64, du: f64) -> f64 {
        self.k_u * horizon * (self.k_x * horizon).exp() * du
    }
}

/// Propagates `u0` and `u1` from `x0` for `horizon` seconds and checks that
/// the endpoints differ by less than the Lipschitz divergence bound.
/// Identical controls count as satisfying it.
pub fn validate_divergence_bound(
    system: &SystemModel,
    x0: &StateVector,
    u0: &ControlInput,
    u1: &ControlInput,
    horizon: f64,
    constants: &AnalysisConstants,
) -> bool {
    let du = euclidean(u0, u1);
    let run = |u: &ControlInput| {
        propagate(system, x0, &PiecewiseControl::constant(u.clone(), horizon), system.dt)
    };
    let (a, b) = match (run(u0), run(u1)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return false,
    };
    let gap = state_gap(system, a.final_state(), b.final_state());
    if du == 0.0 {
        return gap <= 0.0;
    }
    gap < constants.divergence_bound(horizon, du)
}

/// Euclidean norm of the state difference, taking the short arc on angles.
pub fn state_gap(system: &SystemModel, a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(system.state_bounds())
        .map(|((x, y), bound)| {
            let d = if bound.wrap { wrap_angle(x - y) } else { x - y };
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::make_system;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn point_step_is_exact() {
        let point = make_system("point2d").unwrap();
        let x = integrate_step(&point, &[0.0, 0.0].into(), &[1.0, 0.0].into(), 0.1).unwrap();
        assert!((x[0] - 0.1).abs() < 1e-15);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn pendulum_rests_at_horizontal_equilibrium() {
        let pendulum = make_system("pendulum").unwrap();
        let x = integrate_step(&pendulum, &[FRAC_PI_2, 0.0].into(), &[0.0].into(), 0.1).unwrap();
        assert!((x[0] - FRAC_PI_2).abs() < 1e-12);
        assert!(x[1].abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_dt() {
        let point = make_system("point2d").unwrap();
        assert!(integrate_step(&point, &[0.0, 0.0].into(), &[1.0, 0.0].into(), 0.0).is_err());
    }

    #[test]
    fn point_unit_second() {
        let point = make_system("point2d").unwrap();
        let pc = PiecewiseControl::constant([1.0, 0.0].into(), 1.0);
        let traj = propagate(&point, &[0.0, 0.0], &pc, 0.02).unwrap();
        assert!((traj.final_state()[0] - 1.0).abs() < 1e-12);
        assert_eq!(traj.final_state()[1], 0.0);
        assert_eq!(traj.duration, 1.0);
        assert_eq!(CostFunctional::Duration.evaluate(&traj), 1.0);
        assert_eq!(traj.len(), 51);
    }

    #[test]
    fn partial_final_step() {
        let point = make_system("point2d").unwrap();
        let pc = PiecewiseControl::constant([2.0, 0.0].into(), 0.05);
        let traj = propagate(&point, &[0.0, 0.0], &pc, 0.02).unwrap();
        assert_eq!(traj.len(), 4);
        assert!((traj.final_state()[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn divergence_is_reported() {
        let point = make_system("point2d").unwrap();
        let pc = PiecewiseControl::constant([f64::INFINITY, 0.0].into(), 0.1);
        assert!(matches!(
            propagate(&point, &[0.0, 0.0], &pc, 0.02),
            Err(Error::IntegrationDivergence { .. })
        ));
    }

    #[test]
    fn empty_control_rejected() {
        let point = make_system("point2d").unwrap();
        assert!(propagate(&point, &[0.0, 0.0], &PiecewiseControl::new(), 0.02).is_err());
    }

    #[test]
    fn identical_controls_satisfy_bound() {
        let pendulum = make_system("pendulum").unwrap();
        let c = AnalysisConstants {
            k_u: 0.0,
            k_x: 0.0,
            k_c: 1.0,
            m_2: 0.0,
        };
        assert!(validate_divergence_bound(
            &pendulum,
            &[0.3, 0.1].into(),
            &[0.5].into(),
            &[0.5].into(),
            0.5,
            &c
        ));
    }

    #[test]
    fn split_duration_handles_multiples() {
        assert_eq!(split_duration(0.02 * 7.0, 0.02), (7, 0.0));
        let (k, rest) = split_duration(0.05, 0.02);
        assert_eq!(k, 2);
        assert!((rest - 0.01).abs() < 1e-15);
    }
}
