//! Recovery of a kernel and a signal from low-resolution phaseless
//! measurements of their circular convolution.
//!
//! The kernel `h = B g` and signal `x = C z` live in known subspaces; the data
//! are `y = |B̂ g ⊙ Ĉ z|² + η` with `B̂ = F_lo B`, `Ĉ = F_lo C`. The solver
//! ([`refine::bliphasu`]) estimates `(g, z)` by a spectral initializer
//! followed by minibatch Wirtinger-gradient descent on the intensity
//! least-squares objective.
//!
//! All numerical code is generic over [`Real`] (`f32`/`f64`); the aliases
//! below fix the scalar for the common double precision case.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod complex;
mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod refine;
mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ComplexVector64 = complex::ComplexVector<f64>;
pub type ComplexMatrix64 = complex::ComplexMatrix<f64>;
pub type ProblemInstance64 = model::ProblemInstance<f64>;
pub type MeasurementSet64 = model::MeasurementSet<f64>;
pub type RefineConfig64 = refine::RefineConfig<f64>;
pub type BliphasuConfig64 = refine::BliphasuConfig<f64>;
pub type Recovery64 = refine::Recovery<f64>;

pub type ComplexVector32 = complex::ComplexVector<f32>;
pub type ComplexMatrix32 = complex::ComplexMatrix<f32>;
pub type ProblemInstance32 = model::ProblemInstance<f32>;
