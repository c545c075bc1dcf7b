//! Membership encoding for feed-forward classifiers.
//!
//! A training procedure that embeds one-bit membership information for a
//! chosen subset of the training data into a model's hidden activations
//! (white-box) or outputs (black-box), plus the keyed decoder that recovers
//! it, a watermark-verification protocol, and robustness transforms
//! (masking, pruning, adversarial pruning, transfer fine-tuning).

pub mod checkpoint;
pub mod config;
pub mod data;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod key;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod robustness;
pub mod syndata;

pub use error::{Error, Result};
