//! Exact Laurent polynomial arithmetic `A = ℚ[x, x⁻¹]` and matrices over it.

mod matrix;
mod poly;
pub mod scalar;

pub use matrix::{weighted_one_norm, LaurentMatrix};
pub use poly::LaurentPoly;
pub use scalar::{format_rational, parse_rational, rat, rat_int, Interval, Rational, Scalar};
