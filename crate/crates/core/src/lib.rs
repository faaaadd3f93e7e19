//! Simulation and verification toolkit for second-order Riccati systems
//! derived from reciprocal, non-natural Lagrangians.
//!
//! * [`model`] defines the systems and their equations of motion.
//! * [`integrate`] is an adaptive Dormand–Prince integrator with dense output
//!   and singularity detection.
//! * [`conserved`] evaluates energies, generators, time-dependent integrals and
//!   the superintegrability constants, and measures their drift.
//! * [`analytic`] holds the closed-form solutions, quadrature timing and the
//!   third-order linearisation oracle.
//! * [`hamiltonian`] covers the Legendre transform, the Hamiltonians and the
//!   canonical map of the oscillator to the linear oscillator.

pub mod analytic;
pub mod conserved;
pub mod error;
pub mod fd;
pub mod hamiltonian;
pub mod integrate;
pub mod model;

pub use error::{Axis, Error, Result};
pub use integrate::{integrate, IntegratorConfig, Status, Trajectory};
pub use model::{QuadraticU, State, System1D, SystemSpec};
