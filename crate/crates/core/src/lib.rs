//! Numerical geometric mechanics on a coordinate chart of a
//! pseudo-Riemannian configuration space.
//!
//! A mechanical system is a metric [`MetricField`] plus a force form
//! [`ForceForm`]. From it the crate builds the Newton equation, integrates
//! it, measures kinetic-energy conservation (the relativistic criterion),
//! and compares the absolute duration every second-order equation induces
//! with the proper time of each trajectory. [`paradox`] puts the pieces
//! together for two particles that meet twice with different proper times.

pub mod dynamics;
pub mod error;
pub mod expr;
pub mod fd;
pub mod forces;
pub mod format;
pub mod geometry;
pub mod paradox;
mod quadrature;
pub mod runner;
pub mod scenario;
pub mod timeflow;

pub use dynamics::{
    energy_drift, geodesic_equation, hamiltonian, hj_residual, integrate, intermediate_integral_residual,
    newton_equation, newton_residual, SecondOrderEq, Trajectory, VectorField,
};
pub use error::{Error, Result};
pub use forces::{
    alpha_dot, conservative_force, is_contact, lorentz_force, raise_index, relativistic_correction, ForceForm,
    ForceKind, ScalarField, TwoForm,
};
pub use geometry::{Covector, MetricField, TangentPoint};
pub use paradox::{paradox_report, speed_constants, ParadoxReport, ReportMode};
pub use timeflow::{
    duration, duration_invariance_check, is_strictly_relativistic, proper_time, pushforward_trajectory, SmoothMap,
    TimeFormChoice,
};
