//! Magnitude pruning: zero the smallest-magnitude fraction of weights.
//! Biases are never pruned.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{FreezeMask, MlpModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruneScope {
    /// Rank weights across all layers together.
    Global,
    /// Rank within each layer separately.
    PerLayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneSpec {
    /// Fraction of weights (in scope) to zero, in [0, 1].
    pub fraction: f64,
    pub scope: PruneScope,
}

impl PruneSpec {
    pub fn global(fraction: f64) -> Self {
        Self {
            fraction,
            scope: PruneScope::Global,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(Error::invalid("prune fraction must be in [0, 1]"));
        }
        Ok(())
    }
}

/// A pruned weight, addressed by layer and flat index within that layer's
/// weight matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PrunedIndex {
    pub layer: usize,
    pub index: usize,
}

/// Zero the `floor(fraction * N)` smallest-magnitude weights (ties broken
/// by ascending position). Returns the pruned model and the index set.
pub fn magnitude_prune(model: &MlpModel, spec: &PruneSpec) -> Result<(MlpModel, Vec<PrunedIndex>)> {
    spec.validate()?;
    let mut pruned = model.clone();
    let indices = match spec.scope {
        PruneScope::Global => {
            let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(model.weight_count());
            for (l, layer) in model.layers().iter().enumerate() {
                for (i, w) in layer.weights.iter().enumerate() {
                    entries.push((w.abs(), l, i));
                }
            }
            let count = (spec.fraction * entries.len() as f64).floor() as usize;
            entries.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .expect("finite weights")
                    .then(a.1.cmp(&b.1))
                    .then(a.2.cmp(&b.2))
            });
            entries
                .into_iter()
                .take(count)
                .map(|(_, layer, index)| PrunedIndex { layer, index })
                .collect::<Vec<_>>()
        }
        PruneScope::PerLayer => {
            let mut all = Vec::new();
            for (l, layer) in model.layers().iter().enumerate() {
                let mut entries: Vec<(f64, usize)> = layer
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(i, w)| (w.abs(), i))
                    .collect();
                let count = (spec.fraction * entries.len() as f64).floor() as usize;
                entries.sort_by(|a, b| {
                    a.0.partial_cmp(&b.0).expect("finite weights").then(a.1.cmp(&b.1))
                });
                all.extend(
                    entries
                        .into_iter()
                        .take(count)
                        .map(|(_, index)| PrunedIndex { layer: l, index }),
                );
            }
            all
        }
    };
    for &PrunedIndex { layer, index } in &indices {
        pruned.layers_mut()[layer].weights[index] = 0.0;
    }
    Ok((pruned, indices))
}

/// Freeze mask covering exactly the pruned weights.
pub fn freeze_mask_for(model: &MlpModel, pruned: &[PrunedIndex]) -> FreezeMask {
    let mut mask = FreezeMask::none_like(model);
    for &PrunedIndex { layer, index } in pruned {
        mask.layers[layer].weights[index] = true;
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, DenseLayer};
    use crate::rng::Rng;

    fn model_with_weights(weights: Vec<f64>) -> MlpModel {
        let n = weights.len();
        MlpModel::from_layers(vec![DenseLayer {
            weights,
            bias: vec![0.5; 1],
            in_dim: n,
            out_dim: 1,
            activation: Activation::Identity,
        }])
        .unwrap()
    }

    #[test]
    fn zero_fraction_is_identity() {
        let m = model_with_weights(vec![0.5, -0.1, 0.3, -0.7]);
        let (out, idx) = magnitude_prune(&m, &PruneSpec::global(0.0)).unwrap();
        assert_eq!(out, m);
        assert!(idx.is_empty());
    }

    #[test]
    fn full_fraction_zeroes_weights_not_biases() {
        let m = model_with_weights(vec![0.5, -0.1, 0.3, -0.7]);
        let (out, idx) = magnitude_prune(&m, &PruneSpec::global(1.0)).unwrap();
        assert!(out.layers()[0].weights.iter().all(|&w| w == 0.0));
        assert_eq!(out.layers()[0].bias, vec![0.5]);
        assert_eq!(idx.len(), 4);
    }

    #[test]
    fn half_fraction_zeroes_smallest_two() {
        let m = model_with_weights(vec![0.5, -0.1, 0.3, -0.7]);
        let (out, idx) = magnitude_prune(&m, &PruneSpec::global(0.5)).unwrap();
        assert_eq!(out.layers()[0].weights, vec![0.5, 0.0, 0.0, -0.7]);
        let positions: Vec<usize> = idx.iter().map(|p| p.index).collect();
        assert_eq!(positions, vec![1, 2]);
    }

    #[test]
    fn magnitude_ties_break_by_ascending_index() {
        let m = model_with_weights(vec![0.3, -0.3, 0.3, 0.3]);
        let (_, idx) = magnitude_prune(&m, &PruneSpec::global(0.5)).unwrap();
        let positions: Vec<usize> = idx.iter().map(|p| p.index).collect();
        assert_eq!(positions, vec![0, 1]);
    }

    #[test]
    fn pruned_count_is_exactly_floored_fraction() {
        let mut rng = Rng::new(50);
        for _ in 0..50 {
            let hidden = 1 + rng.index(10);
            let model = MlpModel::feedforward(
                1 + rng.index(8),
                &[hidden],
                2 + rng.index(4),
                Activation::Relu,
                rng.next_u64(),
            )
            .unwrap();
            let p = rng.uniform();
            let (_, idx) = magnitude_prune(&model, &PruneSpec::global(p)).unwrap();
            let expect = (p * model.weight_count() as f64).floor() as usize;
            assert_eq!(idx.len(), expect);
        }
    }

    #[test]
    fn per_layer_scope_prunes_each_layer() {
        let model = MlpModel::feedforward(4, &[6], 3, Activation::Relu, 9).unwrap();
        let (_, idx) = magnitude_prune(
            &model,
            &PruneSpec {
                fraction: 0.5,
                scope: PruneScope::PerLayer,
            },
        )
        .unwrap();
        let layer0 = idx.iter().filter(|p| p.layer == 0).count();
        let layer1 = idx.iter().filter(|p| p.layer == 1).count();
        assert_eq!(layer0, 12); // floor(0.5 * 24)
        assert_eq!(layer1, 9); // floor(0.5 * 18)
    }
}
