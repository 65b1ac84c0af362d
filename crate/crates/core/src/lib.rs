//! Logarithmic densities of Chebyshev-type prime number races.
//!
//! The crate computes the limiting distribution of the normalized race error
//! from zeros of Dirichlet L-functions and evaluates its density by Fourier
//! inversion, alongside closed-form moments, bias criteria for weighted races
//! and a sieve-based empirical side.

pub mod arith;
pub mod dist;
pub mod empirical;
pub mod error;
pub mod general;
pub mod lfunc;
pub mod pipeline;
pub mod quad;

pub use error::{Error, Result};
