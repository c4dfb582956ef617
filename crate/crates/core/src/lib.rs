//! Numerical laboratory for the energy of maps of round spheres and real
//! projective spaces.
//!
//! The crate provides three independent Monte Carlo estimators of the energy
//! `E(F) = 1/2 ∫ |dF|²` (pointwise, unit tangent bundle, and averages over
//! totally geodesic subspaces), the conformal dilations of the sphere and the
//! associated hemisphere/retraction deformation of projective space, the
//! sharp constants of the two-sided energy bounds, and pointwise diagnostics
//! (semiconformality defect, tension field) for the equality cases.

pub mod bounds;
pub mod cli;
pub mod deformations;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod maps;

pub use error::{Error, Result};

/// Dense ambient vector.
pub type Vector = nalgebra::DVector<f64>;
/// Dense ambient matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
