//! Pseudospectra and GMRES convergence analysis for Helmholtz finite elements.
//!
//! The crate assembles P1 finite-element discretizations of three model
//! problems on the L-shaped domain (Poisson, Helmholtz with a first-order
//! absorbing boundary condition, and the shifted-Laplace preconditioned
//! Helmholtz operator), computes eps-pseudospectra of the resulting
//! non-normal complex matrices with an adaptive grid method, evaluates
//! a priori inclusion/exclusion regions for those sets, and compares GMRES
//! convergence against the analytic predictions.
//!
//! Module layout:
//!
//! - [`mesh`]: L-shaped coarse triangulation and uniform red refinement.
//! - [`sparse`]: compressed-row complex matrices and Matrix Market export.
//! - [`fem`]: stiffness/mass/boundary-mass assembly and operator composition.
//! - [`linalg`]: banded LU, Lanczos, resolvent norms, GMRES, field of values.
//! - [`pseudospectrum`]: adaptive complex-plane grid and isoline extraction.
//! - [`theory`]: inclusion/exclusion regions, convergence estimators,
//!   bisection closest-point search.
//! - [`cli`]: command-line harness, artifact formats, SVG emission.

pub mod cli;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod pseudospectrum;
pub mod sparse;
pub mod theory;

pub use num_complex::Complex64;
