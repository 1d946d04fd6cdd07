//! Exact computation of the double divisor sums Σ_{m,n≤x} f(mn) for
//! f ∈ {τ, τ₁ₖ, τ^(e)}, the Euler-product constants of their main terms, and
//! exact verification of the generating-function identities behind them.
//!
//! Layout:
//! - [`arith`]: factorization, point values, segmented sieves, Möbius log sums
//! - [`genfun`]: exact truncated bivariate series and the identity checks
//! - [`analytic`]: real ζ, Euler products for C1/C2, main-term evaluators
//! - [`sums`]: the pair-sum algorithms, summatory functions, sweeps and fits

#![allow(clippy::manual_is_multiple_of)]

pub mod analytic;
pub mod arith;
pub mod error;
pub mod genfun;
pub mod sums;

pub use error::{Error, Result};
