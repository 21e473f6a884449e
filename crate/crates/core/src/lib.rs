//! Boundary excitations that focus scalar waves and Maxwell fields in a chosen
//! space-time window while keeping them small in another.
//!
//! The constructions are Tikhonov-regularized operator formulas evaluated with
//! matrix-free finite-difference time-domain solvers whose adjoints are exact
//! transposes of the discrete schemes.

pub mod error;
pub mod geometry;
pub mod io;
pub mod linops;
pub mod maxwell;
pub mod maxwell_localize;
pub mod wave;
pub mod wave_localize;

pub use error::{Error, Result};
