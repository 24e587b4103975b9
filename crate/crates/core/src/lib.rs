//! Statistical models, coding and optimization for generative semantic
//! image transmission.
//!
//! Features come from an orthonormal block transform and are modeled as a
//! Gaussian scale mixture. A class-activation importance map selects the
//! feature positions worth sending, the selected features are range coded
//! under a conditional Gaussian model, and the remaining ones are completed
//! by independent draws at the receiver. The GVIF metric measures how much
//! visual information survives, and the optimizer picks a coder profile and
//! threshold for a given channel and latency bound.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod channel;
pub mod codec;
pub mod error;
pub mod filter;
pub mod generate;
pub mod gsm;
pub mod metric;
pub mod optimizer;
pub mod tensor;
pub mod transform;

pub use error::{Error, Result};
pub use tensor::{Dims, FeatureTensor, ImageTensor, QuantizedTensor, ScaleField, ScalingField, Tensor3};
