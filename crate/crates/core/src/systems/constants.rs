//! Physical constants and bounds for the built-in system models.
//!
//! The pendulum and kinematic point are fully determined by their published
//! equations. Cart-pole, acrobot, quadrotor and airplane coefficients follow
//! the usual forms of those models; control and state bounds are not
//! published for any of the benchmarks and are representative values, not
//! verified against a reference implementation.

/// Gravitational acceleration, m/s².
pub const GRAVITY: f64 = 9.81;

pub mod point {
    /// Workspace half-width, m.
    pub const EXTENT: f64 = 10.0;
    /// Maximum speed, m/s.
    pub const SPEED_MAX: f64 = 10.0;
    pub const DT: f64 = 0.02;
    pub const T_PROP: f64 = 0.5;
    pub const DELTA_S: f64 = 0.5;
    pub const DELTA_BN: f64 = 1.0;
}

pub mod rigid_body {
    pub const EXTENT: f64 = 10.0;
    /// Translational speed bound per axis, m/s.
    pub const LINEAR_SPEED_MAX: f64 = 3.0;
    /// Angular speed bound per axis, rad/s.
    pub const ANGULAR_SPEED_MAX: f64 = 1.0;
    pub const DT: f64 = 0.02;
    pub const T_PROP: f64 = 1.0;
    pub const DELTA_S: f64 = 2.0;
    pub const DELTA_BN: f64 = 4.0;
}

pub mod pendulum {
    /// Mass, kg.
    pub const MASS: f64 = 1.0;
    /// Length, m.
    pub const LENGTH: f64 = 1.0;
    pub const TORQUE_MAX: f64 = 2.0;
    /// Angular velocity bound, rad/s.
    pub const OMEGA_MAX: f64 = 7.0;
    pub const DT: f64 = 0.002;
    pub const T_PROP: f64 = 0.4;
    pub const DELTA_S: f64 = 0.2;
    pub const DELTA_BN: f64 = 0.3;
}

pub mod cartpole {
    /// Cart mass, kg.
    pub const CART_MASS: f64 = 10.0;
    /// Pole mass, kg.
    pub const POLE_MASS: f64 = 5.0;
    /// Pivot to pole center of mass, m.
    pub const POLE_LENGTH: f64 = 2.5;
    /// Pole inertia about its center of mass, kg·m².
    pub const POLE_INERTIA: f64 = 10.0;
    pub const FORCE_MAX: f64 = 300.0;
    pub const X_MAX: f64 = 30.0;
    pub const V_MAX: f64 = 40.0;
    pub const OMEGA_MAX: f64 = 2.0;
    pub const DT: f64 = 0.002;
    pub const T_PROP: f64 = 0.5;
    pub const DELTA_S: f64 = 1.0;
    pub const DELTA_BN: f64 = 2.0;
}

pub mod acrobot {
    /// Mass of each link, kg.
    pub const LINK_MASS: f64 = 1.0;
    /// Length of the first link, m.
    pub const LINK_LENGTH: f64 = 1.0;
    /// Joint to center of mass distance, m.
    pub const LINK_COM: f64 = 0.5;
    pub const INERTIA_1: f64 = 0.2;
    pub const INERTIA_2: f64 = 1.0;
    /// Viscous joint friction, N·m·s/rad.
    pub const DAMPING: f64 = 0.1;
    pub const TORQUE_MAX: f64 = 4.0;
    pub const OMEGA_MAX: f64 = 6.0;
    pub const DT: f64 = 0.002;
    pub const T_PROP: f64 = 0.5;
    pub const DELTA_S: f64 = 0.5;
    pub const DELTA_BN: f64 = 1.0;
}

pub mod quadrotor {
    pub const MASS: f64 = 0.65;
    /// Rotor arm length, m.
    pub const ARM: f64 = 0.23;
    pub const IXX: f64 = 7.5e-3;
    pub const IYY: f64 = 7.5e-3;
    pub const IZZ: f64 = 1.3e-2;
    /// Reactive yaw moment per newton of rotor thrust, m.
    pub const YAW_MOMENT: f64 = 0.02;
    pub const THRUST_MIN: f64 = 1.0;
    pub const THRUST_MAX: f64 = 2.2;
    pub const EXTENT: f64 = 5.0;
    pub const VELOCITY_MAX: f64 = 2.0;
    pub const RATE_MAX: f64 = 2.0;
    /// Meters per radian in the SE(3) distance.
    pub const ROTATION_WEIGHT: f64 = 1.0;
    pub const DT: f64 = 0.02;
    pub const T_PROP: f64 = 0.5;
    pub const DELTA_S: f64 = 3.0;
    pub const DELTA_BN: f64 = 5.0;
}

pub mod airplane {
    /// Quadratic drag per unit mass, 1/m.
    pub const DRAG: f64 = 0.1;
    /// First-order lag gains, 1/s.
    pub const PITCH_GAIN: f64 = 2.0;
    pub const THRUST_GAIN: f64 = 2.0;
    pub const BANK_STIFFNESS: f64 = 4.0;
    pub const BANK_DAMPING: f64 = 3.0;
    pub const XY_EXTENT: f64 = 25.0;
    pub const Z_MAX: f64 = 10.0;
    pub const SPEED_MIN: f64 = 4.0;
    pub const SPEED_MAX: f64 = 12.0;
    pub const FLIGHT_PATH_MAX: f64 = 0.5;
    pub const BANK_MAX: f64 = 1.0;
    pub const BANK_RATE_MAX: f64 = 2.0;
    /// Thrust per unit mass, m/s².
    pub const THRUST_MAX: f64 = 20.0;
    pub const FLIGHT_PATH_CMD_MAX: f64 = 0.4;
    pub const BANK_CMD_MAX: f64 = 0.9;
    pub const DT: f64 = 0.02;
    pub const T_PROP: f64 = 1.0;
    pub const DELTA_S: f64 = 2.0;
    pub const DELTA_BN: f64 = 6.0;
}
