//! Numerical laboratory for ion-acoustic shock waves in a viscous plasma.
//!
//! The crate computes traveling-wave shock profiles of the one-dimensional
//! Navier-Stokes-Poisson system (ions with viscosity, Boltzmann electrons),
//! compares them against the KdV-Burgers first-order description in the
//! scaled small-amplitude regime, and runs time-dependent Lagrangian
//! simulations with energy diagnostics to probe the nonlinear stability of
//! the profiles.
//!
//! Module map:
//! - [`rankine_hugoniot`]: far-field states, jump conditions, downstream
//!   parametrization.
//! - [`profile_ode`]: the steady traveling-wave boundary-value solver and its
//!   structural diagnostics (monotonicity, first integrals, tail rates).
//! - [`kdv_burgers`]: first-order (KdV-Burgers) profiles, the dissipation-
//!   dominated closed form, and phase-plane rates.
//! - [`approximation`]: remainder extraction and the fixed-point remainder
//!   solver that cross-validate the first-order description.
//! - [`evolution`]: Lagrangian time stepper in the shock frame.
//! - [`energy`]: anti-derivative variables and energy/dissipation functionals.

pub mod approximation;
pub mod calculus;
pub mod energy;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod kdv_burgers;
pub mod linalg;
pub mod profile_ode;
pub mod rankine_hugoniot;

pub use error::{Error, Result};
pub use grid::{Grid, GridSpec};
