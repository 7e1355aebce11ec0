//! Radial steady states, linearization and evolution for the supercritical
//! semilinear heat equation `u_t = Δu + |u|^{p−1}u`.

pub mod banded;
pub mod blowdown;
pub mod constants;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod linearize;
pub mod runner;
pub mod ode;
pub mod stencil;
pub mod steady;
pub mod verify;

pub use error::{Error, Result};
