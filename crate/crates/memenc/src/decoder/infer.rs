//! Discriminator reconstruction: retrain a membership classifier from the
//! keyed synthetic data alone, then score arbitrary records through the
//! released model.

use serde::{Deserialize, Serialize};

use crate::decoder::oracle::ModelOracle;
use crate::error::{Error, Result};
use crate::key::EncodingKey;
use crate::nn::{backprop, Activation, LossHead, MlpModel, OptimizerState};
use crate::rng::Rng;
use crate::syndata::gen_synthetic_data;

const STREAM_INFER_INIT: u64 = 0x494e4954; // "INIT"
const STREAM_INFER_SHUFFLE: u64 = 0x53485546; // "SHUF"

/// Training schedule for the inference-phase discriminator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceConfig {
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
}

fn default_hidden() -> usize {
    128
}
fn default_epochs() -> usize {
    80
}
fn default_batch() -> usize {
    32
}
fn default_lr() -> f64 {
    0.001
}
fn default_momentum() -> f64 {
    0.9
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            hidden: default_hidden(),
            epochs: default_epochs(),
            batch_size: default_batch(),
            learning_rate: default_lr(),
            momentum: default_momentum(),
        }
    }
}

/// The reconstructed discriminator: one hidden relu layer with a sigmoid
/// read-out over the oracle's representation.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceDiscriminator {
    net: MlpModel,
}

impl InferenceDiscriminator {
    /// Membership probability of an already-mapped representation.
    pub fn score_representation(&self, h: &[f64]) -> Result<f64> {
        let acts = self.net.forward_all(h)?;
        let logit = acts.logits()[0];
        Ok(1.0 / (1.0 + (-logit).exp()))
    }

    pub fn input_dim(&self) -> usize {
        self.net.input_dim()
    }

    /// Fraction of the synthetic points classified correctly at 0.5.
    pub fn training_accuracy(&self, reps: &[Vec<f64>], labels: &[bool]) -> Result<f64> {
        let mut correct = 0usize;
        for (h, &z) in reps.iter().zip(labels) {
            let s = self.score_representation(h)?;
            if (s >= 0.5) == z {
                correct += 1;
            }
        }
        Ok(correct as f64 / reps.len() as f64)
    }
}

/// Regenerate the keyed synthetic data, query the oracle on all `2n`
/// points, and train a fresh discriminator on the representations.
/// Deterministic given the key and `decoder_seed`.
pub fn reconstruct_discriminator(
    oracle: &dyn ModelOracle,
    key: &EncodingKey,
    decoder_seed: u64,
    cfg: &InferenceConfig,
) -> Result<InferenceDiscriminator> {
    let (reps, labels) = query_synthetic(oracle, key)?;
    train_on_representations(&reps, &labels, oracle.dim(), decoder_seed, cfg)
}

/// Oracle representations of the synthetic points, members first.
pub fn query_synthetic(
    oracle: &dyn ModelOracle,
    key: &EncodingKey,
) -> Result<(Vec<Vec<f64>>, Vec<bool>)> {
    let synth = gen_synthetic_data(key)?;
    let mut reps = Vec::with_capacity(2 * key.n);
    let mut labels = Vec::with_capacity(2 * key.n);
    for x in synth.members.iter().chain(&synth.nonmembers) {
        let h = oracle.query(x).map_err(|e| match e {
            Error::Shape { expected, got } => Error::KeyMismatch(format!(
                "synthetic point dimension {got} does not fit the model (expects {expected})"
            )),
            other => other,
        })?;
        if h.len() != oracle.dim() {
            return Err(Error::KeyMismatch(format!(
                "oracle returned dimension {}, expected {}",
                h.len(),
                oracle.dim()
            )));
        }
        reps.push(h);
    }
    labels.extend(std::iter::repeat(true).take(key.n));
    labels.extend(std::iter::repeat(false).take(key.n));
    Ok((reps, labels))
}

/// Binary cross-entropy training of the one-hidden-layer discriminator.
pub fn train_on_representations(
    reps: &[Vec<f64>],
    labels: &[bool],
    dim: usize,
    decoder_seed: u64,
    cfg: &InferenceConfig,
) -> Result<InferenceDiscriminator> {
    if reps.is_empty() {
        return Err(Error::Empty("representation set"));
    }
    if cfg.hidden == 0 || cfg.batch_size == 0 {
        return Err(Error::invalid("inference config counts must be >= 1"));
    }
    let init_seed = Rng::with_stream(decoder_seed, STREAM_INFER_INIT).next_u64();
    let mut net = MlpModel::feedforward(dim, &[cfg.hidden], 1, Activation::Relu, init_seed)?;
    let mut opt = OptimizerState::new(&net, cfg.learning_rate, cfg.momentum)?;
    let mut rng = Rng::with_stream(decoder_seed, STREAM_INFER_SHUFFLE);

    let mut order: Vec<usize> = (0..reps.len()).collect();
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for chunk in order.chunks(cfg.batch_size) {
            // Sigmoid + BCE: the gradient at the logit is (p - z).
            let batch: Vec<(&[f64], LossHead)> = chunk
                .iter()
                .map(|&i| {
                    let acts = net.forward_all(&reps[i]).expect("dims fixed");
                    let p = 1.0 / (1.0 + (-acts.logits()[0]).exp());
                    let z = if labels[i] { 1.0 } else { 0.0 };
                    (
                        reps[i].as_slice(),
                        LossHead::ActivationGrad {
                            layer: 1,
                            grad: vec![p - z],
                        },
                    )
                })
                .collect();
            let grads = backprop(&net, &batch)?;
            opt.sgd_step(&mut net, &grads)?;
        }
    }
    Ok(InferenceDiscriminator { net })
}

/// Membership probability of one record: `d'(h(x))`. Scores at or above
/// 0.5 are classified as member by default.
pub fn membership_score(
    d: &InferenceDiscriminator,
    oracle: &dyn ModelOracle,
    x: &[f64],
) -> Result<f64> {
    let h = oracle.query(x)?;
    if h.len() != d.input_dim() {
        return Err(Error::Shape {
            expected: d.input_dim(),
            got: h.len(),
        });
    }
    d.score_representation(&h)
}

/// Scores for a whole set of records, in order.
pub fn membership_scores(
    d: &InferenceDiscriminator,
    oracle: &dyn ModelOracle,
    records: &[Vec<f64>],
) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|x| membership_score(d, oracle, x))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::oracle::BlackboxOracle;
    use crate::key::MappingConfig;

    fn key() -> EncodingKey {
        EncodingKey {
            seed: 21,
            n: 30,
            q: 5,
            alpha: 0.0,
            beta: 1.0,
            mapping: MappingConfig::Blackbox,
        }
    }

    fn oracle() -> BlackboxOracle {
        BlackboxOracle::new(
            MlpModel::feedforward(5, &[8], 3, Activation::Relu, 14).unwrap(),
        )
    }

    #[test]
    fn reconstruction_is_deterministic() {
        let cfg = InferenceConfig {
            epochs: 5,
            ..InferenceConfig::default()
        };
        let a = reconstruct_discriminator(&oracle(), &key(), 77, &cfg).unwrap();
        let b = reconstruct_discriminator(&oracle(), &key(), 77, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scoring_is_pure() {
        let cfg = InferenceConfig {
            epochs: 3,
            ..InferenceConfig::default()
        };
        let o = oracle();
        let d = reconstruct_discriminator(&o, &key(), 1, &cfg).unwrap();
        let x = vec![0.2, 0.4, -0.1, 0.9, 0.0];
        let s1 = membership_score(&d, &o, &x).unwrap();
        let s2 = membership_score(&d, &o, &x).unwrap();
        assert_eq!(s1, s2);
        assert!(s1 > 0.0 && s1 < 1.0);
    }

    #[test]
    fn wrong_input_dimension_is_an_error() {
        let cfg = InferenceConfig {
            epochs: 1,
            ..InferenceConfig::default()
        };
        let o = oracle();
        let d = reconstruct_discriminator(&o, &key(), 1, &cfg).unwrap();
        assert!(membership_score(&d, &o, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mismatched_key_dimension_is_a_key_error() {
        let cfg = InferenceConfig::default();
        let mut k = key();
        k.q = 9;
        assert!(matches!(
            reconstruct_discriminator(&oracle(), &k, 0, &cfg),
            Err(Error::KeyMismatch(_))
        ));
    }
}
