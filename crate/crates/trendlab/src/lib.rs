//! File formats, run configuration, experiment presets and the command-line
//! driver around [`trendlab_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod preset;
pub mod recover;

pub use error::{Error, Result};
pub use trendlab_core as core;
