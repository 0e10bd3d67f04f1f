//! Command-line driver for the semantic-aware BEV pooling engine: runs the
//! synthetic pipeline, threshold sweeps, paste demos and pooling benchmarks,
//! and exports grids and norm images.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod export;
pub mod pipeline;
pub mod sweep;

pub use config::RunConfig;
pub use error::{CliError, Result};
