//! Numerical toolkit for harmonic quasiconformal mappings of the unit
//! ball in dimensions 2 and 3.
//!
//! The crate constructs harmonic maps (polynomial components or Poisson
//! extensions of boundary data), computes pointwise derivative data,
//! distortion, averaged derivatives, quasihyperbolic distances on grid
//! graphs, Green and Riesz potentials, and runs the inequality scans the
//! companion CLI reports on. Everything is deterministic given the seeds
//! carried by sampling plans and quadrature configurations.

pub mod error;
pub mod vec;
pub mod mat;
pub mod poly;
pub mod quad;
pub mod sampling;
pub mod geometry;
pub mod harmonic;
pub mod qc_analysis;
pub mod averaging;
pub mod potential;
pub mod lipschitz;
pub mod quasihyperbolic;
pub mod mapspec;
pub mod fixtures;
pub mod report;

pub use error::{Error, Result};
pub use vec::Vector;
pub use mat::SmallMatrix;
