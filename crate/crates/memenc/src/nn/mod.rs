//! Minimal differentiable feed-forward engine.
//!
//! Dense layers with relu/tanh/identity activations, a softmax prediction
//! head, reverse-mode gradients over mean-reduced batches, and momentum SGD
//! with optional per-parameter freezing. All arithmetic is `f64` and every
//! computation is deterministic for a fixed model, input, and batch order.

mod backprop;
mod loss;
mod model;
mod optim;

pub use backprop::{backprop, GradientSet, LossHead};
pub(crate) use backprop::backprop_precomputed;
pub use loss::{cross_entropy, log_probs, softmax, LOG_EPS};
pub use model::{Activation, DenseLayer, LayerActivations, MlpModel};
pub use optim::{FreezeMask, OptimizerState};
