//! Numerical laboratory for the Hardy–Littlewood majorant problem on random and
//! structured frequency sets.
//!
//! The math kernels ([`expsum`], [`extremal`]) are generic over the real scalar
//! via [`Scalar`] (`f32` or `f64`); the aliases below fix the common `f64` case.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod expsum;
pub mod extremal;
pub mod probtools;
pub mod scalar;
pub mod scaling;
pub mod setgen;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Coeffs = expsum::CoefficientSeq<f64>;
pub type Coeffs32 = expsum::CoefficientSeq<f32>;
pub type Autocorr = expsum::Autocorrelation<f64>;
pub type Extremal = extremal::ExtremalResult<f64>;
pub type Extremal32 = extremal::ExtremalResult<f32>;
