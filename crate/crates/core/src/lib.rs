//! Finite-gauge-group Chern-Simons theory.
//!
//! Given a finite group `G` and a 3-cocycle `ω` (the level), this crate
//! computes the modular data of the twisted Drinfeld double, partition
//! functions of closed 3-manifolds through the finite path integral,
//! Hilbert-space dimensions of surfaces, and the 2-dimensional reduction as
//! a Frobenius ring. Wherever two independent routes to the same number
//! exist, both are implemented so that they can be checked against each
//! other.

pub mod error;
pub mod frobenius2d;
pub mod cli;
pub mod cocycles;
pub mod groups;
pub mod modular;
pub mod numeric;
pub mod tqft3;

pub use error::{Error, Result};
