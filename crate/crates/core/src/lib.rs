//! Post-training compression for 3D Gaussian Splatting models.
//!
//! The encoder runs four stages over a trained model:
//!
//! 1. [`pruning`] removes splats using the exact per-splat change in mean
//!    squared error measured by the instrumented [`raster`] pass.
//! 2. [`compaction`] refits every surviving splat's spherical-harmonics
//!    coefficients with importance-weighted ridge regression in YCoCg space.
//! 3. [`quant`] quantizes attributes uniformly and positions with a
//!    camera-adaptive octree.
//! 4. [`bitstream`] serializes everything in octree order and wraps the
//!    payload in a single zstd frame.
//!
//! [`codec`] ties the stages together and provides metrics and reporting.

pub mod bitstream;
pub mod codec;
pub mod compaction;
pub mod error;
pub mod image;
pub mod pruning;
pub mod quant;
pub mod raster;
pub mod scene;

pub use error::{Error, Result};
pub use image::Image;
pub use scene::{Camera, RawSplat, Scene, Splat};
