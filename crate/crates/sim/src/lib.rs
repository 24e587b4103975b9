//! File formats, the payload container, the encode/decode pipeline,
//! synthetic datasets and the experiment drivers behind the `gvif` tool.

pub mod appendix;
pub mod config;
pub mod dataset;
pub mod error;
pub mod formats;
pub mod oracle;
pub mod payload;
pub mod pipeline;
pub mod report;
pub mod sweep;

pub use config::SimConfig;
pub use error::{Result, SimError};
