//! Axle detection from bridge acceleration measurements.
//!
//! The pipeline turns one accelerometer signal per crossing into a
//! six-channel continuous-wavelet scalogram, classifies every sample with a
//! fully convolutional encoder/decoder network, and extracts axle crossing
//! times from the resulting probability trace by prominence-gated peak
//! picking.
//!
//! ```text
//! PassageRecord --ingest--> LabelSet
//!       |                      |
//!       +--scalogram--> Scalogram + targets --detector--> probabilities
//!                                                           |
//!                                      postprocess <--------+
//!                                          |
//!                                   DetectionReport
//! ```
//!
//! Ground truth comes from two rail-mounted wheel-load measuring points
//! (see [`ingest`]); [`synth`] produces synthetic crossings with exact
//! labels for testing and desk-scale training.

pub mod config;
pub mod detector;
pub mod error;
pub mod ingest;
pub mod io;
pub mod postprocess;
pub mod scalogram;
pub mod synth;

pub use error::{Error, Result};
pub use ingest::{LabelSet, PassageRecord};
pub use postprocess::{DetectionReport, PeakParams};
pub use scalogram::{Scalogram, WaveletFamily, WaveletSpec};

/// Toolkit version recorded in run manifests and checkpoints.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
