//! Numerical laboratory for Hénon-type problems on the unit ball of ℝ^N:
//!
//! ```text
//! -Δw = λ |x|^α (1 + w)^p  in B,   w = 0 on ∂B
//! ```
//!
//! together with the scaled form `-Δv = |x|^α (v + a)^p`, `a^{p-1} = λ`, used by
//! the variational machinery.
//!
//! The crate is organised by subsystem:
//!
//! - [`domain`]: problem specifications, grids and fields shared by every solver.
//! - [`closed_forms`]: torsion functions, critical exponents, the explicit bubble
//!   family, weighted Sobolev constants and cutoff-bubble integrals.
//! - [`radial`]: the radial finite-difference operator, linear solves, the
//!   weighted principal eigenpair and the radial energy.
//! - [`branch`]: minimal solutions by monotone iteration and bracketing of the
//!   extinction threshold λ*.
//! - [`mountain_pass`]: a generic path-deformation saddle search plus the drivers
//!   producing local-minimum and mountain-pass solutions in every symmetry class.
//! - [`symmetry`]: two-dimensional reductions for the partially symmetric and the
//!   axially symmetric classes.
//! - [`kelvin`]: the inversion correspondence with exterior-domain problems.
//!
//! Data-parallel loops go through [`exec::Exec`]; with the default `parallel`
//! feature they run on rayon, otherwise sequentially.

pub mod branch;
pub mod closed_forms;
pub mod domain;
mod error;
pub mod exec;
pub mod io;
pub mod kelvin;
pub mod linalg;
pub mod mountain_pass;
pub mod quadrature;
pub mod radial;
pub mod symmetry;

pub use error::{Error, Result};
