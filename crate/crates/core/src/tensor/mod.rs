//! Uniform-grid fields, derivative multi-indices and the bounded ring buffer
//! that holds the streaming window.

mod grid;
mod ring;
pub mod snapshot;

pub use grid::{field_rms, Field, MultiIndex, SpatialGrid};
pub use ring::{RingBuffer, Stamped};
