//! One-bit and coarsely quantized compressed sensing with randomly
//! subsampled Gaussian circulant matrices.
//!
//! The crate covers the measurement ensemble `A = R_I Γ_g` (and its
//! extension `B = R_I [Γ_g h]`), sign and dithered uniform quantizers,
//! reconstruction programs built on an in-repo simplex engine and an
//! operator-splitting solver, empirical ℓ1/ℓ2 restricted-isometry
//! estimators, and a seeded experiment harness.

pub mod circulant;
pub mod error;
pub mod harness;
pub mod model;
pub mod operator;
pub mod quantize;
pub mod recover;
pub mod rip;
pub mod seeding;
pub mod solvers;

pub use error::{Error, Result};

/// `sqrt(π/2)`, the Gaussian ℓ1 normalization constant.
pub const SQRT_HALF_PI: f64 = 1.253_314_137_315_500_1;
