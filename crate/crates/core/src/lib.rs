//! Solver laboratory for the quadratic vector equation
//!
//! ```text
//!     -1/m(z) = z + a + S m(z),      z in the upper half-plane,
//! ```
//!
//! on a discretized probability space. The crate computes the solution `m`,
//! extracts the generating density `v = Im m / pi` on the real line, analyzes
//! the stability operator `F = |m| S |m|`, classifies the points where the
//! density vanishes into square-root edges and cubic-root cusps, and samples
//! Wigner-type random matrices to compare their spectra with the density.
//!
//! The crate is `no_std` (it needs `alloc`). IO, file formats and the command
//! line front end live in the `qve` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod density;
pub mod ensembles;
mod error;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod singularity;
pub mod solver;
pub mod stability;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;
