//! Switching diffusions driven by matrix-valued second-order operators.
//!
//! A process `(X_t, Y_t)` with a scalar diffusion component on an interval
//! and a phase in `1..=N` is described by its generator
//! `1/2 A(x) f'' + B(x) f' + Q(x) f` with diagonal `A`, `B` and a
//! position-dependent intensity matrix `Q`. This crate provides
//!
//! - [`model`]: the coefficient triple, structural validation, and the
//!   Wright-Fisher mutation family with `N` phases,
//! - [`quadrature`]: Gauss-Jacobi rules and the matrix-valued inner product,
//! - [`spectral`]: orthonormal matrix eigenfunctions, the spectral transition
//!   density, PDE residual checks and the invariant distribution,
//! - [`functionals`]: hitting probabilities, exit times, recurrence trends and
//!   phase-tendency thresholds,
//! - [`montecarlo`]: reproducible path simulation and estimators,
//! - [`cli`]: the `switchdiff` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod functionals;
pub mod matrix;
pub mod model;
pub mod montecarlo;
pub mod cli;
pub mod poly;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::PhaseMatrix;
pub use model::{wright_fisher_model, SwitchingDiffusionModel, WrightFisherParams};
pub use poly::MatrixPolynomial;
pub use quadrature::{gauss_jacobi_rule, QuadratureRule};
