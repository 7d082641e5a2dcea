//! Numerical laboratory for radially symmetric blow-up in the semilinear heat
//! equation `u_t = Δu + λ e^{pu}` on a ball, driven by the nonlinear boundary
//! flux `∂u/∂η = e^{qu}`.
//!
//! The crate simulates radial solutions with an amplitude-aware explicit
//! integrator, monitors the sign invariants that the comparison-principle
//! arguments rely on, estimates the blow-up time from the recorded trace,
//! fits the logarithmic growth rate of the boundary value against its proven
//! window, certifies boundary-only blow-up with an explicit supersolution,
//! and cross-checks the finite-difference solver against the heat-kernel
//! integral representation.
//!
//! Module map:
//! - [`model`] — problem data, admissible initial profiles, hypothesis checks
//! - [`discretize`] — radial grid, radial Laplacian, ghost-node flux closure
//! - [`integrate`] — adaptive explicit time stepping and trace recording
//! - [`kernel`] — heat kernel, layer potentials, integral-identity oracle
//! - [`analyze`] — blow-up time estimation, rate fits, invariant monitors,
//!   supersolution comparison
//! - [`config`], [`report`], [`commands`], [`verify`] — experiment plumbing
//!   behind the `blowup-lab` binary

pub mod analyze;
pub mod commands;
pub mod config;
pub mod discretize;
mod error;
pub mod integrate;
pub mod kernel;
pub mod model;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
