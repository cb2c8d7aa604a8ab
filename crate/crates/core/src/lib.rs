//! Satellite attitude determination from emulated star trackers and a gyro.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: fixed-size matrices, a Jacobi symmetric eigensolver and a
//!   seeded Gaussian source.
//! - [`attitude`]: quaternions (stored vector-first, scalar-last), Gibbs
//!   vectors, attitude matrices and kinematic propagation.
//! - [`startracker`]: star catalog and pinhole star-tracker emulation.
//! - [`wahba`]: single-frame solutions (TRIAD and Davenport's q-method).
//! - [`filters`]: the additive and multiplicative extended Kalman filters.
//! - [`harness`]: the closed simulation loop, metrics and report files.

pub mod attitude;
mod error;
pub mod filters;
pub mod harness;
pub mod numerics;
pub mod startracker;
pub mod wahba;

pub use error::{Error, Result};
