//! radarkit — physics-informed augmentation, detection and evaluation for
//! scanning-radar imagery.
//!
//! The crate covers the full loop around a small radar dataset:
//!
//! 1. **Geometry** ([`geometry`]) — sensor description, polar and Cartesian
//!    power grids, and the remapping between them.
//! 2. **Augmentation** ([`augment`]) — per-class attenuation-over-range
//!    models, resolution-over-range resampling, speckle noise, background
//!    shift and a seeded batch pipeline that multiplies a small dataset.
//! 3. **Detection** ([`detect`]) — per-azimuth CA-CFAR, DBSCAN clustering in
//!    metric coordinates, fixed-size box proposals and a pluggable patch
//!    classifier.
//! 4. **Evaluation** ([`eval`]) — IoU matching, average precision and mAP,
//!    confusion matrices and MSAD image comparison.
//! 5. **Simulation** ([`sim`]) — point-scatterer scenes from the radar
//!    equation, used as geometric ground truth in tests and demos.
//! 6. **I/O** ([`io`]) and the command-line surface ([`cli`]).
//!
//! Every randomized operation takes an explicit seed or RNG and is a pure
//! function of its inputs, so batch outputs are reproducible bit-for-bit.

pub mod augment;
pub mod cli;
pub mod detect;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{
    cartesian_to_polar, cross_range_cell_size, polar_to_cartesian, range_resolution,
    CartesianImage, GridPoint, InterpMethod, PolarImage, SensorConfig, SPEED_OF_LIGHT,
};
