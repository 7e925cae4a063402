//! Limited-angle tomography stability laboratory.
//!
//! Discrete Radon/FBP operators on the `[-1,1]^2` field of view, Fourier cone
//! multipliers, stability diagnostics for datasets of phantoms, and a desk-
//! scale frozen-kernel shallow network that exhibits the frequency-cone
//! obstruction and its nonlinear escape.
//!
//! All numeric kernels are generic over the scalar type through
//! [`scalar::Scalar`]; the aliases below pin the common `f64` and `f32`
//! instantiations.

// negated comparisons like !(x > 0) are NaN-rejecting validation guards;
// the assign-op and multiple-of forms clash with generic scalar bounds
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::assign_op_pattern)]
#![allow(clippy::manual_is_multiple_of)]
#![allow(clippy::needless_range_loop)]

pub mod bessel;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod io;
pub mod ntk;
pub mod phantoms;
pub mod radon;
pub mod scalar;
pub mod util;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Image64 = grid::Image<f64>;
pub type Spectrum64 = grid::Spectrum<f64>;
pub type ConeMask64 = grid::ConeMask<f64>;
pub type AngleSet64 = radon::AngleSet<f64>;
pub type Sinogram64 = radon::Sinogram<f64>;
pub type Scene64 = phantoms::Scene<f64>;
pub type Dataset64 = phantoms::Dataset<f64>;
pub type PeriodicImage64 = ntk::PeriodicImage<f64>;
pub type ShallowNet64 = ntk::ShallowNet<f64>;

pub type Image32 = grid::Image<f32>;
pub type Spectrum32 = grid::Spectrum<f32>;
pub type Sinogram32 = radon::Sinogram<f32>;
