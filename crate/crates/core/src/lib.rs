//! Numerical laboratory for the indefinite inner product of the massless
//! scalar field in 1+1 dimensions and its Krein-space metrics.

pub mod cli;
pub mod config;
pub mod error;
pub mod gram;
pub mod krein;
pub mod profiles;
pub mod quad;
pub mod suite;
pub mod wightman;

pub use error::{Error, Result};
