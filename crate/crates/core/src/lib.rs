//! Raster logos to layered 3D-printable relief pendants.
//!
//! The pipeline: decode a raster image, collapse it to luminance,
//! quantize to a stepped heightfield, clip by implicit planar regions,
//! mesh into closed shells, assemble (shells may overlap, no booleans),
//! scale to print size, and export binary or ASCII STL. On the side:
//! volume analytics for planning filament changes, and deterministic
//! preview renders.
//!
//! Heavy inner loops run on rayon when the `parallel` feature (default)
//! is enabled; output is bit-identical either way.

pub mod config;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod heightfield;
pub mod mesh;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod region;
pub mod render;
pub mod stl;

pub use error::{Error, Result};
