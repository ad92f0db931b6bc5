//! Discretized Schrödinger operators on 1D/2D boxes and numerical criteria
//! for discreteness of their spectrum.
//!
//! The crate is organized bottom-up:
//!
//! - [`lattice`]: grids, potentials with `+∞` values, discrete measures and
//!   assembly of `H₀`, `H₀ + V` and `H₀ + μ` as symmetric matrices.
//! - [`spectral`]: eigensolvers, functional calculus, projectors and
//!   singular-value diagnostics.
//! - [`semigroup`]: `e^{−tH}`, kernel norms and super Poincaré constants.
//! - [`criteria`]: sublevel sets, cube profiles, Molchanov and
//!   Benci–Fortunato scans, form bounds, capacity, the `Av` functional, Weyl
//!   residuals and the truncation probe.
//! - [`runner`]: config-driven experiments behind the `spectra-lab` binary.
//!
//! Inner products are weighted by the cell measure `h^d`, so norms are stable
//! under refinement.

pub mod criteria;
pub mod error;
pub mod lattice;
pub(crate) mod numerics;
pub mod runner;
pub mod semigroup;
pub mod spectral;

pub use error::{Error, Result};
