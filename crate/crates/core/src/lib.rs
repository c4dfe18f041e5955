//! Through-wall UWB micro-Doppler processing.
//!
//! The processing chain runs from simulated SFCW echoes through range
//! compression, wall-clutter mitigation and time-frequency analysis to
//! 2D-PCA + kNN classification:
//!
//! ```text
//! sim::synthesize_echo -> range::range_compress -> clutter::*
//!     -> tfr::{ra_stft, cratfr, rmax_from_range_map, ...}
//!     -> classify::{to_grayscale, evaluate}
//! ```

pub mod classify;
pub mod clutter;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod range;
pub mod sim;
pub mod tfr;

pub use classify::{EvalConfig, EvalReport, GrayImage, TwoDPcaModel};
pub use clutter::{ClutterMethod, FilterCoeffs};
pub use error::{Error, Result};
pub use pipeline::{BenchmarkMethod, BenchmarkReport, PipelineConfig};
pub use range::RangeMap;
pub use sim::{MotionClass, MotionScene, RadarParams, RawEchoMatrix, Scatterer, WallSpec};
pub use tfr::{RadarDataCube, Spectrogram, StftConfig, TfrMethod};
