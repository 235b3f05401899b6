//! Numerical spray geometry on the slit tangent bundle.
//!
//! Metrics and projective factors are parsed from a small expression language,
//! differentiated exactly with nested jets, and pushed through the
//! Frölicher–Nijenhuis calculus to the curvature of the geodesic spray. The
//! [`curvature`] module checks the conditions characterising constant flag
//! curvature and the projective invariance identities.
#![no_std]
// `!(a < b)` is used on purpose so that NaN fails a check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calculus;
pub mod curvature;
pub mod dsl;
pub mod error;
pub mod finsler;
pub mod jet;
pub mod linalg;
pub mod sampling;

pub use error::{Error, Result};
pub use jet::{max_order, set_max_order, Jet, Scalar};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
