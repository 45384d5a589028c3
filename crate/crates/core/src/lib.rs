//! Monte Carlo engine for gradient (inhomogeneous) site percolation on the
//! triangular lattice.
//!
//! The crate covers the whole sampling pipeline: lattice geometry
//! ([`lattice`]), seeded colorings under homogeneous or linear-gradient
//! densities ([`profile`]), connectivity and crossing events ([`cluster`]),
//! alternating arm events in annuli ([`arms`]), the finite-size characteristic
//! length and its gradient counterpart ([`charlen`]), extraction and
//! measurement of the gradient front ([`front`]), and the estimate and
//! power-law arithmetic everything reports through ([`fitstats`]).
//!
//! Real-valued code is generic over [`scalar::Real`]; the aliases below fix
//! the scalar to `f64`, which is what the simulation drivers use.

pub mod arms;
pub mod charlen;
pub mod cluster;
pub mod error;
pub mod exec;
pub mod fitstats;
pub mod front;
pub mod lattice;
pub mod profile;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use exec::Executor;
pub use lattice::{Annulus, Region, SiteCoord};
pub use profile::{Color, Configuration, DensityProfile, SeedSpec};

/// Monte Carlo estimate in double precision.
pub type Estimate = fitstats::Estimate<f64>;
/// Log-log regression result in double precision.
pub type PowerLawFit = fitstats::PowerLawFit<f64>;
/// Regression input point in double precision.
pub type FitPoint = fitstats::FitPoint<f64>;
/// Reference exponents in double precision.
pub type ReferenceExponents = charlen::ReferenceExponents<f64>;
