//! Query-complexity toolkit for discriminating two unitary operations.
//!
//! The crate computes the arc length `theta` spanned by the eigenphases of
//! `U1^dagger U2`, the query lower bounds that follow from it for bounded-error
//! and one-sided-error discrimination, and simulates sequential and parallel
//! discrimination protocols together with the optimal final measurements, so
//! that the bounds can be checked against concrete protocols.
//!
//! Modules, bottom up:
//!
//! - [`matrix`]: dense complex matrices, unitary eigen-systems, Haar sampling.
//! - [`spectral`]: smallest covering arc, unitary fidelity, trace distance.
//! - [`bounds`]: query lower bounds and their inversions.
//! - [`protocol`]: `T`-query sequential protocols and per-step audits.
//! - [`measurement`]: Helstrom and unambiguous measurements.
//! - [`builder`]: parallel scheme and numerical protocol search.
//! - [`campaign`]: seeded verification campaigns and report output.

pub mod bounds;
pub mod builder;
pub mod campaign;
pub mod error;
pub mod matrix;
pub mod measurement;
pub mod protocol;
pub mod spectral;

pub use error::{Error, Result};
