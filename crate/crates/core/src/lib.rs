//! Stability-operator spectra of domains on constant-mean-curvature model
//! surfaces.
//!
//! The crate discretizes the quadratic form `I(f, f) = ∫ |Df|² − |B|² f²`
//! with zero Dirichlet data on monotone families of domains `D(t)`, solves
//! both the Dirichlet problem and the volume-constrained ("twisted") problem
//! on the mean-zero hyperplane, and tracks the resulting eigenvalue curves in
//! `t`. Zero crossings of these curves are extremal domains and Jacobi-field
//! events; [`morse::verify`] checks them against the global Morse index
//! identity, the index sandwich `i − 1 ≤ ĩ ≤ i`, interlacing, and the
//! Jacobi-field distribution bounds.
//!
//! Module map:
//!
//! * [`surfaces`]: model surfaces and built-in domain families.
//! * [`discretize`]: finite-difference assembly of stiffness, mass and mean.
//! * [`tridiag`], [`dense`]: the symmetric eigensolvers underneath.
//! * [`eig`]: Dirichlet and twisted spectra, index and nullity.
//! * [`analytic`]: closed-form oracles (circle family, ψ zeros, Bessel zeros).
//! * [`morse`]: curve tracing, event detection and verification.

pub mod analytic;
pub mod dense;
pub mod discretize;
pub mod eig;
mod error;
pub mod morse;
pub mod surfaces;
pub mod tridiag;

pub use error::{Error, Result};
