//! Numerical laboratory for MPS-structured variational circuits.
//!
//! Modules, bottom-up: [`linalg`] dense kernels, [`pauli`] Pauli strings and
//! coefficients, [`haar`] Haar sampling and moment formulas, [`circuits`]
//! ansatz construction and simulation, [`observables`] objectives and
//! gradients, [`analytic`] exact second moments and bounds, [`tensornet`]
//! Pauli-basis tensor trains, and [`experiments`] the config-driven runners.

pub mod analytic;
pub mod circuits;
pub mod error;
pub mod experiments;
pub mod haar;
pub mod linalg;
pub mod observables;
pub mod pauli;
pub mod rng;
pub mod stats;
pub mod tensornet;

pub use error::{Error, Result};
