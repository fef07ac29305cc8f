//! Numerical laboratory for the multilinear scattering expansion of the
//! one-dimensional Dirac system
//!
//! ```text
//! a'(x) = F(x) e^{-2ikx} b(x),   b'(x) = F(x) e^{2ikx} a(x),
//! ```
//!
//! with chirp potentials `F = sum_{j=N}^{2N} N^{-1} cos(2 (A j / N) x) phi(x / N - j)`.
//!
//! Modules, bottom up:
//! - [`signal`]: bump profile, choice of `A`, the chirp and its sampled form.
//! - [`multilinear`]: the simplex integrals `T_n(F_1, ..., F_n)(k, x)`.
//! - [`spectral`]: the correlation route to `T_2`, the Riesz projection,
//!   inverse-law fits and the weak-L2 estimator.
//! - [`scattering`]: exact `a`, `b`, transfer matrices and identities.
//! - [`experiments`]: growth/boundedness drivers and result emission.

pub mod error;
pub mod experiments;
pub mod multilinear;
pub mod quadrature;
pub mod report;
pub mod scattering;
pub mod signal;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use report::{Diagnostic, Report};
