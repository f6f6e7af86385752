//! Numerics for radially symmetric unbounded liquid bridges.
//!
//! The generating curve of such a bridge solves a first-order system for
//! (radius, height, inclination); the family is parametrized by the radius
//! `sigma` of its vertical point, whose height is `T(sigma)`. This crate
//! computes `T` by Chebyshev rectangular spectral collocation with Newton
//! iteration on an exterior domain truncated at an adaptively grown outer
//! radius, differentiates `T` spectrally, integrates the variation
//! equations of the family, and cross-checks the results against washer
//! volumes, Vogel's bounds, and Turkington's small-radius asymptotics.

// Guards are written as `!(x > 0.0)` on purpose: unlike `x <= 0.0`, the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bvp;
pub mod chebyshev;
pub mod error;
pub mod ode;
pub mod profile;
pub mod tprime;
pub mod variation;
pub mod verification;

pub use error::{Error, Result};
