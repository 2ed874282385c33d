//! File formats, training harness and reports around [`gradvar_core`].
//!
//! - [`io`]: PNG load/save, CSV and visualisation helpers
//! - [`checkpoint`]: binary model checkpoints
//! - [`config`]: training configuration and run manifests
//! - [`dataset`]: synthetic dataset export and directory loading
//! - [`trainer`]: seeded training loop and validation
//! - [`evaluate`]: per-image metric reports and variance profiles
//! - [`ablation`]: loss-grid comparison tables
//! - [`plot`]: SVG histogram overlays

pub mod ablation;
pub mod checkpoint;
pub mod config;
pub mod dataset;
mod error;
pub mod evaluate;
pub mod io;
pub mod plot;
pub mod trainer;

pub use error::{Error, Result};
pub use gradvar_core as core;
