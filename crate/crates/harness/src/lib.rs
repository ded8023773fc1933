//! Benchmark harness: builds transformed image sequences, runs or ingests
//! detectors, and writes repeatability matrices, bounds curves and McNemar
//! comparison grids under one output directory with a checksummed manifest.

pub mod config;
pub mod error;
pub mod heatmap;
pub mod layout;
pub mod manifest;
pub mod pipeline;
pub mod sequence;
pub mod synthetic;

pub use config::RunConfig;
pub use error::{HarnessError, Result};
pub use manifest::{verify, Manifest, VerifyReport};
pub use pipeline::{Session, Stage, StageOutcome};
