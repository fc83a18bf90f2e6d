//! Numerical nonlinear potential theory for discrete measures: Wolff and
//! Riesz potentials, Riesz/Bessel and weighted half-space capacities,
//! empirical checks of composition and Hardy-type inequalities, and the
//! monotone Picard iteration for Lane-Emden systems with measure data.

pub mod capacity;
pub mod error;
pub mod halfspace;
pub mod inequality;
pub mod measure;
pub mod par;
pub mod random;
pub mod suite;
pub mod system;

pub use error::{Error, Result};
pub mod potential;
