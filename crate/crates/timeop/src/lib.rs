//! Numerical operator laboratory on a truncated half-line.
//!
//! The crate discretizes L²([0, ∞), dE), builds the multiplication operator
//! H, the derivative operator T = iℏ d/dE with and without its origin
//! condition, the Friedrichs extension of T², and the positive square root
//! T_√ of that extension. On top of these it provides the sine-transform
//! "time representation" in which T_√ acts diagonally, a holomorphic Fourier
//! transform to the upper half-plane, and commutator machinery that measures
//! which algebraic relations survive the passage from T to T_√.
//!
//! Everything is dense, double precision, single-threaded and deterministic.

pub mod algebra;
pub mod config;
pub mod error;
pub mod grid;
pub mod hft;
pub mod operators;
pub mod report;
pub mod spectral;
pub mod suites;

mod eigen;

pub use error::{Error, Result};

/// Relative threshold below which an origin value counts as zero for
/// domain-membership purposes. The default Gaussian test bump carries
/// f(0) ≈ 3.7e−6 relative to its peak and must classify as origin-vanishing.
pub const DOMAIN_ORIGIN_TOL: f64 = 1.0e-5;

/// Entrywise relative Hermiticity defect allowed for operators tagged as
/// Dirichlet-both.
pub const HERMITICITY_TOL: f64 = 1.0e-12;
