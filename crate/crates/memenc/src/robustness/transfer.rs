//! Transfer fine-tuning: reuse a trained model as a feature extractor for a
//! new task by replacing the output layer, then fine-tune all parameters.

use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::nn::{backprop, Activation, DenseLayer, LossHead, MlpModel, OptimizerState};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    /// Seed for the fresh output layer.
    pub head_seed: u64,
    pub shuffle_seed: u64,
}

fn default_momentum() -> f64 {
    0.9
}
fn default_batch() -> usize {
    32
}

/// Replace the final layer with a freshly initialized `new_classes`-output
/// layer.
pub fn splice_output_layer(model: &MlpModel, new_classes: usize, seed: u64) -> Result<MlpModel> {
    if new_classes == 0 {
        return Err(Error::invalid("new class count must be >= 1"));
    }
    let mut layers = model.layers().to_vec();
    let last_in = layers.last().expect("nonempty").in_dim;
    let mut rng = Rng::new(seed);
    *layers.last_mut().expect("nonempty") =
        DenseLayer::glorot(last_in, new_classes, Activation::Identity, &mut rng);
    MlpModel::from_layers(layers)
}

/// Splice a new head for the dataset's classes and fine-tune every
/// parameter with cross-entropy.
pub fn transfer_finetune(
    model: &MlpModel,
    dataset: &LabeledDataset,
    cfg: &TransferConfig,
) -> Result<MlpModel> {
    if dataset.is_empty() {
        return Err(Error::Empty("transfer dataset"));
    }
    if dataset.dim() != model.input_dim() {
        return Err(Error::Shape {
            expected: model.input_dim(),
            got: dataset.dim(),
        });
    }
    let spliced = splice_output_layer(model, dataset.classes(), cfg.head_seed)?;
    finetune(spliced, dataset, cfg)
}

/// Plain cross-entropy fine-tuning of an existing model (no head
/// replacement); used to continue transfer training incrementally.
pub fn finetune(
    mut model: MlpModel,
    dataset: &LabeledDataset,
    cfg: &TransferConfig,
) -> Result<MlpModel> {
    if cfg.batch_size == 0 {
        return Err(Error::invalid("batch size must be >= 1"));
    }
    if dataset.classes() != model.classes() {
        return Err(Error::Shape {
            expected: model.classes(),
            got: dataset.classes(),
        });
    }
    let mut opt = OptimizerState::new(&model, cfg.learning_rate, cfg.momentum)?;
    let mut rng = Rng::new(cfg.shuffle_seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&[f64], LossHead)> = chunk
                .iter()
                .map(|&i| {
                    (
                        dataset.feature(i),
                        LossHead::CrossEntropy {
                            class: dataset.label(i),
                        },
                    )
                })
                .collect();
            let grads = backprop(&model, &batch)?;
            opt.sgd_step(&mut model, &grads)?;
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_benchmark;

    fn cfg(epochs: usize) -> TransferConfig {
        TransferConfig {
            epochs,
            learning_rate: 0.001,
            momentum: 0.9,
            batch_size: 16,
            head_seed: 100,
            shuffle_seed: 200,
        }
    }

    #[test]
    fn zero_epochs_only_replaces_the_head() {
        let (train, _) = gen_benchmark(1, 4, 24, 5, 6.0).unwrap();
        let model = MlpModel::feedforward(5, &[7, 6], 3, Activation::Relu, 2).unwrap();
        let out = transfer_finetune(&model, &train, &cfg(0)).unwrap();
        // Hidden layers untouched.
        for l in 0..2 {
            assert_eq!(model.layers()[l], out.layers()[l]);
        }
        // Head replaced: new class count, fresh weights.
        assert_eq!(out.classes(), 4);
        assert_eq!(out.layers()[2].in_dim, 6);
        assert_ne!(
            model.layers()[2].weights[..6],
            out.layers()[2].weights[..6]
        );
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let (train, _) = gen_benchmark(1, 2, 12, 9, 6.0).unwrap();
        let model = MlpModel::feedforward(5, &[4], 3, Activation::Relu, 2).unwrap();
        assert!(transfer_finetune(&model, &train, &cfg(1)).is_err());
    }

    #[test]
    fn finetuning_learns_the_new_task() {
        let (train, test) = gen_benchmark(6, 3, 60, 8, 8.0).unwrap();
        let model = MlpModel::feedforward(8, &[10], 2, Activation::Relu, 4).unwrap();
        let mut c = cfg(40);
        c.learning_rate = 0.02;
        let out = transfer_finetune(&model, &train, &c).unwrap();
        let acc = crate::metrics::test_accuracy(&out, &test).unwrap();
        assert!(acc >= 0.95, "transfer accuracy {acc}");
    }
}
