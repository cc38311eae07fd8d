//! Solvers for the 1-D aggregation equation `d_t rho + d_x(a(W' * rho) rho) = 0`
//! with pointy attractive potentials (`W'' = -delta_0 + w`).
//!
//! * [`macro_scheme`]: Lax-Friedrichs finite volumes with the chain-rule
//!   face velocity, which keeps the right dynamics after blow-up.
//! * [`kinetic`]: asymptotic-preserving relaxation/transport splitting for
//!   the underlying BGK model.
//! * [`models`]: preset problems and the particle and Burgers oracles.
//! * [`diagnostics`]: invariant monitors and convergence studies.
//! * [`app`]: config files, runs and studies writing CSV.

// `!(x > 0.0)` is used on purpose: it also rejects NaN. Index loops mirror
// the stencil formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod app;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod kinetic;
pub mod law;
pub mod macro_scheme;
pub mod models;
pub mod potential;

pub use error::{Error, Result};
pub use grid::{cumulative_mass, trapezoid, wasserstein1, Grid1D, VelocityGrid};
pub use kinetic::{EquilibriumModel, KineticScheme, KineticState, Splitting};
pub use law::{sup_velocity_bound, VelocityLaw};
pub use macro_scheme::{MacroScheme, MacroState, RunControl, Trajectory, VelocityMode};
pub use models::{preset, ProblemPreset, PRESET_NAMES};
pub use potential::{Closure, FieldSolver, PointyPotential, PotentialField};
