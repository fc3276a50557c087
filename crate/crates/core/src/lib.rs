//! Noisy random-projection hashes with distance-dependent privacy accounting.
//!
//! Random-projection hashes of real vectors are perturbed bitwise with
//! randomized response (LSHRR) or by Laplace noise before hashing (LapLSH),
//! and the resulting privacy loss is accounted for as a function of the
//! angular distance between inputs.

pub mod audit;
pub mod data;
pub mod error;
pub mod lsh;
pub mod mechanisms;
pub mod nns;
mod par;
pub mod privacy;
pub mod rng;
pub mod vectors;

pub use error::{Error, Result};

/// True when the crate was built with the rayon backend.
pub fn is_parallel() -> bool {
    par::is_parallel()
}
