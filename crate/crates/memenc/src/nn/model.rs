use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::loss::softmax;
use crate::rng::Rng;

/// Element-wise nonlinearity applied after a dense transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed in terms of the post-activation value.
    #[inline]
    pub fn grad_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::invalid(format!("unknown activation '{other}'"))),
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        })
    }
}

/// Dense affine transform plus activation. Weights are row-major with shape
/// `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl DenseLayer {
    /// Glorot-uniform initialized layer: weights in
    /// `±sqrt(6 / (in_dim + out_dim))`, biases zero.
    pub fn glorot(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut Rng) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim)
            .map(|_| rng.uniform_range(-limit, limit))
            .collect();
        Self {
            weights,
            bias: vec![0.0; out_dim],
            in_dim,
            out_dim,
            activation,
        }
    }

    /// `out = activation(W x + b)`, written into `out`.
    #[inline]
    pub fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.in_dim);
        debug_assert_eq!(out.len(), self.out_dim);
        for (o, slot) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            *slot = self.activation.apply(dot(row, x) + self.bias[o]);
        }
    }
}

/// Unrolled dot product; keeps four independent accumulators so the FMA
/// chain does not serialize.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let k = i * 4;
        acc[0] = a[k].mul_add(b[k], acc[0]);
        acc[1] = a[k + 1].mul_add(b[k + 1], acc[1]);
        acc[2] = a[k + 2].mul_add(b[k + 2], acc[2]);
        acc[3] = a[k + 3].mul_add(b[k + 3], acc[3]);
    }
    let mut tail = 0.0;
    for k in chunks * 4..a.len() {
        tail = a[k].mul_add(b[k], tail);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Feed-forward classifier: a stack of dense layers whose final output is
/// read through softmax for prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<DenseLayer>,
}

impl MlpModel {
    /// Build from explicit layers, validating that dimensions chain.
    pub fn from_layers(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty("model layers"));
        }
        for w in layers.windows(2) {
            if w[1].in_dim != w[0].out_dim {
                return Err(Error::Shape {
                    expected: w[0].out_dim,
                    got: w[1].in_dim,
                });
            }
        }
        for layer in &layers {
            if layer.weights.len() != layer.in_dim * layer.out_dim
                || layer.bias.len() != layer.out_dim
            {
                return Err(Error::invalid("layer buffer sizes do not match dims"));
            }
            if layer.weights.iter().chain(&layer.bias).any(|v| !v.is_finite()) {
                return Err(Error::invalid("non-finite parameter value"));
            }
        }
        Ok(Self { layers })
    }

    /// Standard classifier: `input_dim -> hidden[0] -> ... -> classes`,
    /// hidden layers with `hidden_activation`, identity output layer, Glorot
    /// init from `seed`.
    pub fn feedforward(
        input_dim: usize,
        hidden: &[usize],
        classes: usize,
        hidden_activation: Activation,
        seed: u64,
    ) -> Result<Self> {
        if input_dim == 0 || classes == 0 || hidden.iter().any(|&h| h == 0) {
            return Err(Error::invalid("all layer dimensions must be positive"));
        }
        let mut rng = Rng::new(seed);
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut in_dim = input_dim;
        for &width in hidden {
            layers.push(DenseLayer::glorot(in_dim, width, hidden_activation, &mut rng));
            in_dim = width;
        }
        layers.push(DenseLayer::glorot(in_dim, classes, Activation::Identity, &mut rng));
        Self::from_layers(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    /// Number of classes, i.e. the output dimension of the last layer.
    pub fn classes(&self) -> usize {
        self.layers.last().expect("nonempty").out_dim
    }

    /// Hidden-layer widths, in order (everything but the output layer).
    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.out_dim)
            .collect()
    }

    pub fn weight_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len()).sum()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Full forward pass: every layer's post-activation plus the softmax
    /// probability vector.
    pub fn forward_all(&self, x: &[f64]) -> Result<LayerActivations> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut post = Vec::with_capacity(self.layers.len());
        let mut input = x;
        for layer in &self.layers {
            let mut out = vec![0.0; layer.out_dim];
            layer.forward_into(input, &mut out);
            post.push(out);
            input = post.last().expect("just pushed");
        }
        let probs = softmax(post.last().expect("nonempty"));
        Ok(LayerActivations { post, probs })
    }

    /// Softmax output only.
    pub fn forward_probs(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_all(x)?.probs)
    }

    /// Predicted class: argmax of the probability vector, lowest index on
    /// ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let probs = self.forward_probs(x)?;
        Ok(argmax(&probs))
    }
}

/// Lowest-index argmax.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Per-layer post-activations and the softmax output for one input.
#[derive(Debug, Clone)]
pub struct LayerActivations {
    post: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

impl LayerActivations {
    /// Post-activation of layer `i` (0-based).
    pub fn layer(&self, i: usize) -> &[f64] {
        &self.post[i]
    }

    pub fn num_layers(&self) -> usize {
        self.post.len()
    }

    /// Pre-softmax output, i.e. the last layer's post-activation.
    pub fn logits(&self) -> &[f64] {
        self.post.last().expect("nonempty")
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub(crate) fn post_slices(&self) -> &[Vec<f64>] {
        &self.post
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(weights: Vec<f64>, bias: Vec<f64>, in_dim: usize, out_dim: usize) -> DenseLayer {
        DenseLayer {
            weights,
            bias,
            in_dim,
            out_dim,
            activation: Activation::Identity,
        }
    }

    #[test]
    fn zero_model_gives_uniform_probs() {
        let model =
            MlpModel::from_layers(vec![layer(vec![0.0; 40], vec![0.0; 10], 4, 10)]).unwrap();
        let acts = model.forward_all(&[1.0, -2.0, 0.5, 3.0]).unwrap();
        assert!(acts.logits().iter().all(|&z| z == 0.0));
        for &p in acts.probs() {
            assert!((p - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let model = MlpModel::from_layers(vec![layer(
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0],
            2,
            2,
        )])
        .unwrap();
        let acts = model.forward_all(&[1.0, 2.0]).unwrap();
        assert_eq!(acts.logits(), &[1.0, 2.0]);
    }

    #[test]
    fn forward_matches_naive_recomputation() {
        // Independent oracle: recompute the 2-layer forward pass with plain
        // nested loops and no shared helpers.
        let model = MlpModel::feedforward(5, &[7], 3, Activation::Tanh, 99).unwrap();
        let x = [0.3, -1.2, 0.8, 2.0, -0.5];
        let acts = model.forward_all(&x).unwrap();

        let l0 = &model.layers()[0];
        let mut h = vec![0.0; 7];
        for o in 0..7 {
            let mut z = l0.bias[o];
            for i in 0..5 {
                z += l0.weights[o * 5 + i] * x[i];
            }
            h[o] = z.tanh();
        }
        let l1 = &model.layers()[1];
        let mut logits = vec![0.0; 3];
        for o in 0..3 {
            let mut z = l1.bias[o];
            for i in 0..7 {
                z += l1.weights[o * 7 + i] * h[i];
            }
            logits[o] = z;
        }
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
        let sum: f64 = exps.iter().sum();

        for (a, b) in acts.layer(0).iter().zip(&h) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in acts.probs().iter().zip(exps.iter().map(|e| e / sum)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn input_shape_mismatch_is_an_error() {
        let model = MlpModel::feedforward(4, &[3], 2, Activation::Relu, 0).unwrap();
        assert!(matches!(
            model.forward_all(&[1.0, 2.0]),
            Err(Error::Shape { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn mismatched_layer_dims_rejected() {
        let bad = vec![
            layer(vec![0.0; 6], vec![0.0; 3], 2, 3),
            layer(vec![0.0; 8], vec![0.0; 2], 4, 2),
        ];
        assert!(MlpModel::from_layers(bad).is_err());
    }

    #[test]
    fn seeded_init_reproducible_and_bounded() {
        let a = MlpModel::feedforward(10, &[8, 4], 3, Activation::Relu, 7).unwrap();
        let b = MlpModel::feedforward(10, &[8, 4], 3, Activation::Relu, 7).unwrap();
        assert_eq!(a, b);
        let limit = (6.0 / (10 + 8) as f64).sqrt();
        assert!(a.layers()[0].weights.iter().all(|w| w.abs() <= limit));
    }

    #[test]
    fn argmax_ties_break_low() {
        assert_eq!(argmax(&[0.3, 0.3, 0.3]), 0);
        assert_eq!(argmax(&[0.1, 0.5, 0.5]), 1);
    }
}
