//! Sampling-based kinodynamic motion planning with sparse trees.
//!
//! The crate provides the dynamical systems and environments used for
//! evaluation ([`systems`]), fixed-step integration ([`dynamics`]), an
//! approximate nearest-neighbor graph ([`nn`]), tree planners
//! ([`planners`]) and the trial harness ([`bench`]).

pub mod bench;
pub mod dynamics;
pub mod error;
pub mod nn;
pub mod planners;
pub mod systems;

pub use dynamics::{
    propagate, ControlInput, ControlSegment, CostFunctional, PiecewiseControl, StateVector,
    Trajectory,
};
pub use error::{Error, Result};
pub use systems::{make_system, Environment, SystemModel};
