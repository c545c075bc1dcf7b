use crate::error::{Error, Result};
use crate::nn::backprop::GradientSet;
use crate::nn::model::MlpModel;

/// Per-parameter freeze flags. Frozen entries are skipped entirely by
/// `sgd_step`, so their values (and velocities) never change.
#[derive(Debug, Clone)]
pub struct FreezeMask {
    pub layers: Vec<LayerFreeze>,
}

#[derive(Debug, Clone)]
pub struct LayerFreeze {
    pub weights: Vec<bool>,
    pub bias: Vec<bool>,
}

impl FreezeMask {
    pub fn none_like(model: &MlpModel) -> Self {
        Self {
            layers: model
                .layers()
                .iter()
                .map(|l| LayerFreeze {
                    weights: vec![false; l.weights.len()],
                    bias: vec![false; l.bias.len()],
                })
                .collect(),
        }
    }
}

/// Momentum SGD state: `v <- mu*v + g; theta <- theta - eta*v`.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub learning_rate: f64,
    pub momentum: f64,
    velocity: GradientSet,
    freeze: Option<FreezeMask>,
}

impl OptimizerState {
    pub fn new(model: &MlpModel, learning_rate: f64, momentum: f64) -> Result<Self> {
        if learning_rate <= 0.0 {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::invalid("momentum must be in [0, 1)"));
        }
        Ok(Self {
            learning_rate,
            momentum,
            velocity: GradientSet::zeros_like(model),
            freeze: None,
        })
    }

    pub fn set_freeze(&mut self, mask: FreezeMask) {
        self.freeze = Some(mask);
    }

    /// Scale the learning rate (used by decay schedules).
    pub fn decay(&mut self, factor: f64) {
        self.learning_rate *= factor;
    }

    /// One momentum-SGD update in place. Frozen parameters are untouched,
    /// bit for bit.
    pub fn sgd_step(&mut self, model: &mut MlpModel, grads: &GradientSet) -> Result<()> {
        if !grads.matches(model) || !self.velocity.matches(model) {
            return Err(Error::invalid("gradient/velocity shape mismatch"));
        }
        let eta = self.learning_rate;
        let mu = self.momentum;
        for (l, layer) in model.layers_mut().iter_mut().enumerate() {
            let g = &grads.layers[l];
            let v = &mut self.velocity.layers[l];
            let frozen = self.freeze.as_ref().map(|f| &f.layers[l]);
            for i in 0..layer.weights.len() {
                if frozen.is_some_and(|f| f.weights[i]) {
                    continue;
                }
                v.weights[i] = mu * v.weights[i] + g.weights[i];
                layer.weights[i] -= eta * v.weights[i];
            }
            for i in 0..layer.bias.len() {
                if frozen.is_some_and(|f| f.bias[i]) {
                    continue;
                }
                v.bias[i] = mu * v.bias[i] + g.bias[i];
                layer.bias[i] -= eta * v.bias[i];
            }
        }
        Ok(())
    }
}
