//! Streaming identification of PDE coefficients from noisy snapshots.
//!
//! Snapshots arrive one step at a time. Each is reduced to a slice of
//! spatially integrated weak-form features, a bounded ring buffer holds the
//! last `K_mem` slices, and the linear system they integrate to drives one
//! hard-thresholded proximal gradient step per arrival.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod sims;
pub mod sparse;
pub mod tensor;
pub mod weakform;

pub use error::{Error, Result};
