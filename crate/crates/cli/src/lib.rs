//! Command-line front end for the `releq` stability library: single
//! triangles, sweeps over the triangle of normalized masses, critical-side
//! curves, agreement runs and trajectory dumps.

pub mod app;
pub mod config;
pub mod error;
pub mod radius;
pub mod sweep;
pub mod verify;

pub use error::{CliError, Result};
