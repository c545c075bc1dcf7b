//! Membership inference against a released model: regenerate the keyed
//! synthetic data, retrain the discriminator from it, score records, verify
//! watermarks, and reconstruct redacted records.

mod infer;
mod oracle;
mod reconstruct;
mod verify;

pub use infer::{
    membership_score, membership_scores, query_synthetic, reconstruct_discriminator,
    train_on_representations, InferenceConfig, InferenceDiscriminator,
};
pub use oracle::{oracle_for, BlackboxOracle, HttpOracle, ModelOracle, WhiteboxOracle};
pub use reconstruct::reconstruct_record;
pub use verify::{
    binomial_upper_tail, verify_watermark, WatermarkVerdict, DEFAULT_SIGNIFICANCE, DEFAULT_TAU,
};
