//! File formats, simulation harness and command-line plumbing around `hsfuse-core`.

pub mod composite;
pub mod config;
pub mod envi;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod tables;

pub use error::{Error, Result};
