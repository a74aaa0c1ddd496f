//! Numerical laboratory for (γ, ρ)-irregular paths.
//!
//! The crate simulates Gaussian and stable processes on uniform grids, evaluates
//! the oscillatory integral `Φ^w_{s,t}(ξ) = ∫_s^t e^{iξ·w_r} dr` by exact
//! segment-wise quadrature, estimates irregularity exponents from frequency-shell
//! envelopes, and uses the resulting averaged fields to integrate ODEs with
//! rough drifts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod error;
pub mod geometry;
pub mod irregularity;
pub mod lab;
pub mod path;
pub mod rng;
pub mod simulate;
pub mod spectral;
pub mod stats;
pub mod young;

pub use error::{Error, Result};
pub use path::{HolderEstimate, SampledPath};
pub use rng::Seed;
