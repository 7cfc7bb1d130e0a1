//! Discrete complex analysis on critical rhombic maps.
//!
//! The crate builds finite rhombic cell decompositions of planar domains and
//! computes with discrete holomorphic functions on them: monomials,
//! exponentials and their Laurent jets, train-tracks and combinatorial
//! convexity, exponential bases, special exponentials, the spectrum of the
//! integration operator, and a contour-integral Green's function.

pub mod calculus;
pub mod cli;
pub mod error;
pub mod exponentials;
#[cfg(feature = "green")]
pub mod green;
pub mod linalg;
pub mod map;
pub mod render;
pub mod spectral;
pub mod tracks;

pub use error::{Error, Result};
pub use num_complex::Complex64;
