//! Convergent power-series solution of the first dispersion branch of a
//! two-dimensional plasmonic crystal.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`cellfem`] meshes the unit cell and solves the matrix (Neumann) and
//!    inclusion (Dirichlet, Helmholtz) cell problems with P1 elements.
//! 2. [`cascade`] drives the hierarchy of correctors `ψ_m` and dispersion
//!    coefficients `ξ²_m`.
//! 3. [`bounds`] turns the measured constants into a certified radius of
//!    convergence `R = 1/(4J)` using [`catalan`] and [`specfun`].
//! 4. [`effective`] evaluates the branch, effective parameters and error bars.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cascade;
pub mod catalan;
pub mod cellfem;
pub mod cli;
pub mod effective;
pub mod error;
pub mod reference;
pub mod specfun;

pub use error::{Error, Result};
