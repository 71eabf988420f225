//! Numerics for thin pre-strained plates in the Kirchhoff regime.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the whole analysis
//! chain: a spontaneous strain profile through the thickness is reduced to
//! a mean strain and a target curvature tensor, the pointwise minimizers of
//! the bending energy are classified in closed form, and piecewise constant
//! targets are realized by explicit C¹ patchworks of cylinders. The
//! [`energy`] module evaluates both the 2D limit energy and rescaled 3D
//! energies on recovery sequences, and [`gel`] maps Flory-Rehner gel
//! parameters onto the plate model.
//!
//! IO, configuration and the command line live in the `morphoplate` crate.
#![no_std]
// NaN-rejecting `!(x > 0.0)` guards and index loops over small matrices are
// used on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classify;
pub mod cylinder;
pub mod domain;
pub mod energy;
mod error;
pub mod forms;
pub mod gel;
pub mod math;
pub mod quadrature;
pub mod strain;
pub mod tensor;

pub use error::{Error, Result};
