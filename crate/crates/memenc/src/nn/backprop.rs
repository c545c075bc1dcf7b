use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nn::model::MlpModel;

/// One gradient buffer per parameter buffer, shape-matched to a model.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<LayerGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl GradientSet {
    pub fn zeros_like(model: &MlpModel) -> Self {
        Self {
            layers: model
                .layers()
                .iter()
                .map(|l| LayerGradient {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn matches(&self, model: &MlpModel) -> bool {
        self.layers.len() == model.layers().len()
            && self
                .layers
                .iter()
                .zip(model.layers())
                .all(|(g, l)| g.weights.len() == l.weights.len() && g.bias.len() == l.bias.len())
    }

    fn add_assign(&mut self, other: &GradientSet) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.iter_mut().zip(&b.weights) {
                *x += y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        for layer in &mut self.layers {
            for w in &mut layer.weights {
                *w *= factor;
            }
            for b in &mut layer.bias {
                *b *= factor;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }
}

/// Where the loss gradient enters the network for one sample.
#[derive(Debug, Clone)]
pub enum LossHead {
    /// Cross-entropy against `class`, through the softmax head. The
    /// injected gradient at the final post-activation is `p - onehot(class)`.
    CrossEntropy { class: usize },
    /// An externally computed `dL/d(post-activation)` injected at layer
    /// `layer` (0-based). This is how the encoding loss flows from the
    /// discriminator back into the classifier.
    ActivationGrad { layer: usize, grad: Vec<f64> },
}

/// Chunk size for deterministic parallel batch reduction. Per-chunk sums are
/// accumulated sequentially and combined in chunk order, so the result is
/// bit-identical regardless of thread count.
const CHUNK: usize = 16;

/// Mean gradient of the batch loss with respect to every parameter.
pub fn backprop(model: &MlpModel, batch: &[(&[f64], LossHead)]) -> Result<GradientSet> {
    if batch.is_empty() {
        return Err(Error::Empty("backprop batch"));
    }
    for (x, head) in batch {
        if x.len() != model.input_dim() {
            return Err(Error::Shape {
                expected: model.input_dim(),
                got: x.len(),
            });
        }
        match head {
            LossHead::CrossEntropy { class } => {
                if *class >= model.classes() {
                    return Err(Error::ClassOutOfRange {
                        index: *class,
                        classes: model.classes(),
                    });
                }
            }
            LossHead::ActivationGrad { layer, grad } => {
                let Some(l) = model.layers().get(*layer) else {
                    return Err(Error::invalid(format!("no layer {layer}")));
                };
                if grad.len() != l.out_dim {
                    return Err(Error::Shape {
                        expected: l.out_dim,
                        got: grad.len(),
                    });
                }
            }
        }
    }

    let mut total = if batch.len() > CHUNK {
        let chunk_sums: Vec<GradientSet> = batch
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = GradientSet::zeros_like(model);
                for (x, head) in chunk {
                    let acts = model.forward_all(x).expect("validated");
                    accumulate_sample(model, x, &acts, head, &mut acc);
                }
                acc
            })
            .collect();
        let mut total = GradientSet::zeros_like(model);
        for sum in &chunk_sums {
            total.add_assign(sum);
        }
        total
    } else {
        let mut total = GradientSet::zeros_like(model);
        for (x, head) in batch {
            let acts = model.forward_all(x).expect("validated");
            accumulate_sample(model, x, &acts, head, &mut total);
        }
        total
    };
    total.scale(1.0 / batch.len() as f64);
    Ok(total)
}

/// As `backprop`, but reusing forward activations the caller already has.
/// No batch validation beyond debug assertions; callers guarantee shapes.
pub(crate) fn backprop_precomputed(
    model: &MlpModel,
    batch: &[(&[f64], &crate::nn::LayerActivations, LossHead)],
) -> Result<GradientSet> {
    if batch.is_empty() {
        return Err(Error::Empty("backprop batch"));
    }
    let mut total = GradientSet::zeros_like(model);
    for (x, acts, head) in batch {
        accumulate_sample(model, x, acts, head, &mut total);
    }
    total.scale(1.0 / batch.len() as f64);
    Ok(total)
}

/// Adds one sample's parameter gradients into `acc`.
fn accumulate_sample(
    model: &MlpModel,
    x: &[f64],
    acts: &crate::nn::LayerActivations,
    head: &LossHead,
    acc: &mut GradientSet,
) {
    let post = acts.post_slices();

    let (start, mut upstream): (usize, Vec<f64>) = match head {
        LossHead::CrossEntropy { class } => {
            let mut g = acts.probs().to_vec();
            g[*class] -= 1.0;
            (model.layers().len() - 1, g)
        }
        LossHead::ActivationGrad { layer, grad } => (*layer, grad.clone()),
    };

    for l in (0..=start).rev() {
        let layer = &model.layers()[l];
        let input: &[f64] = if l == 0 { x } else { &post[l - 1] };
        let grads = &mut acc.layers[l];

        // dz = upstream (.) act'(a); then dW = dz (x) input, db = dz,
        // and the next upstream is W^T dz.
        let mut next = if l > 0 { vec![0.0; layer.in_dim] } else { Vec::new() };
        for o in 0..layer.out_dim {
            let dz = upstream[o] * layer.activation.grad_from_output(post[l][o]);
            grads.bias[o] += dz;
            let row = o * layer.in_dim;
            let wrow = &layer.weights[row..row + layer.in_dim];
            let grow = &mut grads.weights[row..row + layer.in_dim];
            if l > 0 {
                for i in 0..layer.in_dim {
                    grow[i] += dz * input[i];
                    next[i] += wrow[i] * dz;
                }
            } else {
                for i in 0..layer.in_dim {
                    grow[i] += dz * input[i];
                }
            }
        }
        upstream = next;
    }
}

/// Convenience wrapper for the plain classification case.
#[cfg(test)]
pub(crate) fn backprop_cross_entropy(
    model: &MlpModel,
    xs: &[&[f64]],
    ys: &[usize],
) -> Result<GradientSet> {
    let batch: Vec<(&[f64], LossHead)> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x, LossHead::CrossEntropy { class: y }))
        .collect();
    backprop(model, &batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::loss::cross_entropy;
    use crate::nn::model::{Activation, MlpModel};
    use crate::rng::Rng;

    /// Central finite difference of the mean batch cross-entropy with
    /// respect to every parameter.
    fn fd_gradient(model: &mut MlpModel, xs: &[Vec<f64>], ys: &[usize], step: f64) -> GradientSet {
        let loss = |m: &MlpModel| -> f64 {
            let mut total = 0.0;
            for (x, &y) in xs.iter().zip(ys) {
                let probs = m.forward_probs(x).unwrap();
                total += cross_entropy(&probs, y).unwrap();
            }
            total / xs.len() as f64
        };
        let mut fd = GradientSet::zeros_like(model);
        for l in 0..model.layers().len() {
            for w in 0..model.layers()[l].weights.len() {
                let orig = model.layers()[l].weights[w];
                model.layers_mut()[l].weights[w] = orig + step;
                let plus = loss(model);
                model.layers_mut()[l].weights[w] = orig - step;
                let minus = loss(model);
                model.layers_mut()[l].weights[w] = orig;
                fd.layers[l].weights[w] = (plus - minus) / (2.0 * step);
            }
            for b in 0..model.layers()[l].bias.len() {
                let orig = model.layers()[l].bias[b];
                model.layers_mut()[l].bias[b] = orig + step;
                let plus = loss(model);
                model.layers_mut()[l].bias[b] = orig - step;
                let minus = loss(model);
                model.layers_mut()[l].bias[b] = orig;
                fd.layers[l].bias[b] = (plus - minus) / (2.0 * step);
            }
        }
        fd
    }

    fn max_rel_err(a: &GradientSet, b: &GradientSet) -> f64 {
        let mut worst = 0.0f64;
        for (la, lb) in a.layers.iter().zip(&b.layers) {
            for (x, y) in la
                .weights
                .iter()
                .chain(&la.bias)
                .zip(lb.weights.iter().chain(&lb.bias))
            {
                let scale = x.abs().max(y.abs()).max(1e-8);
                worst = worst.max((x - y).abs() / scale);
            }
        }
        worst
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = Rng::new(17);
        for trial in 0..5 {
            let mut model =
                MlpModel::feedforward(6, &[9, 5], 4, Activation::Tanh, 100 + trial).unwrap();
            let xs: Vec<Vec<f64>> = (0..8)
                .map(|_| (0..6).map(|_| rng.uniform_range(-2.0, 2.0)).collect())
                .collect();
            let ys: Vec<usize> = (0..8).map(|_| rng.index(4)).collect();
            let refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
            let analytic = backprop_cross_entropy(&model, &refs, &ys).unwrap();
            let fd = fd_gradient(&mut model, &xs, &ys, 1e-5);
            let err = max_rel_err(&analytic, &fd);
            assert!(err < 1e-4, "trial {trial}: max rel err {err}");
        }
    }

    #[test]
    fn linear_softmax_gradient_is_outer_product() {
        // Single identity layer + softmax + CE: dW = (p - onehot(y)) (x) x.
        let model = MlpModel::feedforward(3, &[], 4, Activation::Relu, 5).unwrap();
        let x = vec![0.5, -1.0, 2.0];
        let y = 2;
        let probs = model.forward_probs(&x).unwrap();
        let grads =
            backprop(&model, &[(&x, LossHead::CrossEntropy { class: y })]).unwrap();
        for o in 0..4 {
            let delta = probs[o] - if o == y { 1.0 } else { 0.0 };
            for i in 0..3 {
                let expect = delta * x[i];
                let got = grads.layers[0].weights[o * 3 + i];
                assert!((got - expect).abs() < 1e-12, "w[{o},{i}] {got} vs {expect}");
            }
            assert!((grads.layers[0].bias[o] - delta).abs() < 1e-12);
        }
    }

    #[test]
    fn injected_gradient_matches_finite_differences() {
        // Inject a fixed upstream gradient at the first hidden layer and
        // finite-difference L = g . a_0 against it.
        let mut model = MlpModel::feedforward(4, &[6, 3], 2, Activation::Tanh, 9).unwrap();
        let x = vec![0.4, -0.3, 1.1, 0.8];
        let g = vec![0.3, -0.7, 0.2, 0.9, -0.1, 0.5];
        let analytic = backprop(
            &model,
            &[(
                &x,
                LossHead::ActivationGrad {
                    layer: 0,
                    grad: g.clone(),
                },
            )],
        )
        .unwrap();

        let loss = |m: &MlpModel| -> f64 {
            let acts = m.forward_all(&x).unwrap();
            acts.layer(0).iter().zip(&g).map(|(a, gi)| a * gi).sum()
        };
        let step = 1e-5;
        for w in 0..model.layers()[0].weights.len() {
            let orig = model.layers()[0].weights[w];
            model.layers_mut()[0].weights[w] = orig + step;
            let plus = loss(&model);
            model.layers_mut()[0].weights[w] = orig - step;
            let minus = loss(&model);
            model.layers_mut()[0].weights[w] = orig;
            let fd = (plus - minus) / (2.0 * step);
            let got = analytic.layers[0].weights[w];
            let scale = fd.abs().max(got.abs()).max(1e-8);
            assert!((fd - got).abs() / scale < 1e-4);
        }
        // Layers above the injection point receive no gradient.
        assert!(analytic.layers[1].weights.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_batch_is_an_error() {
        let model = MlpModel::feedforward(2, &[], 2, Activation::Relu, 0).unwrap();
        assert!(matches!(backprop(&model, &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn parallel_chunking_is_bit_deterministic() {
        let model = MlpModel::feedforward(5, &[8], 3, Activation::Relu, 3).unwrap();
        let mut rng = Rng::new(8);
        let xs: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..5).map(|_| rng.uniform_range(-1.0, 1.0)).collect())
            .collect();
        let ys: Vec<usize> = (0..100).map(|_| rng.index(3)).collect();
        let refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        let a = backprop_cross_entropy(&model, &refs, &ys).unwrap();
        let b = backprop_cross_entropy(&model, &refs, &ys).unwrap();
        assert_eq!(a, b);
    }
}
