//! Robustness transforms and the encoding-preserving fine-tuning loops:
//! input masking, magnitude pruning, adversarial pruning, transfer
//! fine-tuning.

mod advprune;
mod mask;
mod prune;
mod transfer;

pub use advprune::adversarial_prune;
pub use mask::{mask_input, ImageGeometry, MaskMode, MaskSpec};
pub use prune::{freeze_mask_for, magnitude_prune, PruneScope, PruneSpec, PrunedIndex};
pub use transfer::{finetune, splice_output_layer, transfer_finetune, TransferConfig};
