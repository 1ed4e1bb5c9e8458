//! File formats, configuration and the end-to-end pipeline around
//! [`crisisnet_core`].

pub mod archive;
pub mod config;
pub mod error;
pub mod export;
pub mod pipeline;
pub mod report;
pub mod resources;

pub use crisisnet_core as core;
pub use error::{Error, Result};
