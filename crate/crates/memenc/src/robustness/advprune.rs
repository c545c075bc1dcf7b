//! Adversarial pruning: magnitude-prune, then rerun the encoding loop with
//! the pruned weights frozen at zero and a freshly initialized
//! discriminator, so compression does not destroy the encoded membership.

use crate::encoder::{membership_encoding_frozen, EncodingConfig, EncodingReport, SplitDataset};
use crate::error::Result;
use crate::key::EncodingKey;
use crate::nn::MlpModel;
use crate::robustness::prune::{freeze_mask_for, magnitude_prune, PruneSpec, PrunedIndex};

/// Prune and fine-tune with encoding preserved. Every pruned weight remains
/// exactly zero in the returned model.
pub fn adversarial_prune(
    model: &MlpModel,
    spec: &PruneSpec,
    split: &SplitDataset,
    key: &EncodingKey,
    finetune: &EncodingConfig,
) -> Result<(MlpModel, EncodingReport, Vec<PrunedIndex>)> {
    let (pruned, indices) = magnitude_prune(model, spec)?;
    let mask = freeze_mask_for(&pruned, &indices);
    let (tuned, _disc, report) =
        membership_encoding_frozen(split, key, pruned, finetune, Some(mask))?;
    Ok((tuned, report, indices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_benchmark;
    use crate::encoder::{membership_encoding, select_members, Selection};
    use crate::key::MappingConfig;
    use crate::nn::Activation;

    #[test]
    fn pruned_weights_stay_exactly_zero_through_finetuning() {
        let (train, test) = gen_benchmark(3, 3, 60, 8, 6.0).unwrap();
        let split = select_members(
            &train,
            test,
            Selection::Random { fraction: 0.2, seed: 1 },
        )
        .unwrap();
        let key = EncodingKey {
            seed: 10,
            n: 30,
            q: 8,
            alpha: 0.0,
            beta: 1.0,
            mapping: MappingConfig::Whitebox {
                layer: 2,
                unit_fraction: 0.5,
            },
        };
        let cfg = EncodingConfig {
            epochs: 3,
            batch_size: 16,
            shuffle_seed: 4,
            ..EncodingConfig::default()
        };
        let model = MlpModel::feedforward(8, &[12, 8], 3, Activation::Relu, 6).unwrap();
        let (encoded, _, _) = membership_encoding(&split, &key, model, &cfg).unwrap();

        let (tuned, _, indices) = adversarial_prune(
            &encoded,
            &PruneSpec::global(0.5),
            &split,
            &key,
            &cfg,
        )
        .unwrap();
        assert!(!indices.is_empty());
        for idx in &indices {
            let w = tuned.layers()[idx.layer].weights[idx.index];
            assert_eq!(w.to_bits(), 0.0f64.to_bits(), "{idx:?} = {w}");
        }
        // Unpruned weights did move during fine-tuning.
        assert_ne!(tuned, encoded);
    }

    #[test]
    fn zero_fraction_is_plain_encoding_finetune() {
        let (train, test) = gen_benchmark(5, 2, 48, 6, 6.0).unwrap();
        let split = select_members(
            &train,
            test,
            Selection::Random { fraction: 0.25, seed: 2 },
        )
        .unwrap();
        let key = EncodingKey {
            seed: 11,
            n: 20,
            q: 6,
            alpha: 0.0,
            beta: 1.0,
            mapping: MappingConfig::Blackbox,
        };
        let cfg = EncodingConfig {
            epochs: 2,
            batch_size: 16,
            shuffle_seed: 9,
            ..EncodingConfig::default()
        };
        let model = MlpModel::feedforward(6, &[8], 2, Activation::Relu, 3).unwrap();
        let (a, _, idx) =
            adversarial_prune(&model, &PruneSpec::global(0.0), &split, &key, &cfg).unwrap();
        assert!(idx.is_empty());
        let (b, _, _) = crate::encoder::membership_encoding(&split, &key, model, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
