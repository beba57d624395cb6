//! Numerical laboratory for rational inner functions (RIFs) on the bidisc.
//!
//! A RIF is built from a polynomial `p` as `λ z₁ᴹ z₂ᴺ p̃ / p`, where `p̃` is the
//! reflection of `p`. The crate provides the polynomial algebra behind that
//! construction, zero-freeness certification and Agler (sum-of-squares)
//! certificate checking, weighted Bergman volume estimation for Carleson-box
//! tests, Łojasiewicz exponent fits near torus singularities, and finite
//! Gram truncations of the induced composition operators.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
mod gauss;
pub mod io;
pub mod lojasiewicz;
pub mod measure;
pub mod operator;
pub mod poly;
pub mod rif;
pub mod stability;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use poly::{HermitianForm, Poly2};
pub use rif::{RationalInnerFunction, SymbolMap, TorusPoint};

/// A point of ℂ².
pub type C2 = [Complex64; 2];

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Euclidean norm of `a - b` in ℂ².
pub fn dist2(a: &C2, b: &C2) -> f64 {
    ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt()
}
