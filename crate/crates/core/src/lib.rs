//! Zero-stability analysis for linear multistep methods on smooth nonuniform grids.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! - [`method`]: constant- and variable-step BDF coefficients, deflation of the
//!   principal root and a polynomial-exactness oracle.
//! - [`grid`]: grid deformation maps, realized grids and a digital-filter step
//!   size controller.
//! - [`operators`]: banded lower-triangular operators `A`, `R`, `D`, `H`, their
//!   factorization, solves and infinity norms.
//! - [`stability`]: extraneous roots, the constant `C0`, perturbation stencils
//!   `T_j`, sufficient conditions and the step-count threshold `N*`.
//! - [`sim`]: direct homogeneous recursions, boundedness sweeps and quadrature
//!   convergence studies.
//!
//! File formats, the CLI and thread-parallel sweeps live in the `zerostab` crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod grid;
pub mod method;
pub mod operators;
pub mod poly;
pub mod scalar;
pub mod sim;
pub mod stability;

pub use error::{Error, Result};
pub use grid::{build_grid, Deformation, Grid, GridFamily, GridMap};
pub use method::{
    bdf_constant_row, bdf_variable_row, deflate_row, exactness_residual, CoefficientRow,
    DeflatedRow, Family, MethodSpec, Normalization,
};
pub use scalar::{Rational, Scalar};
