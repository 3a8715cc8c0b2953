//! Numerical laboratory for the two-dimensional Coulomb gas at inverse
//! temperature `beta <= 1`.
//!
//! The crate covers weighted logarithmic potential theory on the Riemann
//! sphere, exact determinantal formulas at `beta = 1`, exact and Markov chain
//! samplers, and a harness checking sub-Gaussian deviation bounds, error
//! sequences and discrepancy rates at finite `N`.

pub mod cli;
pub mod determinantal;
pub mod deviations;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod potentials;
pub mod sampling;

pub use error::{Error, Result};
