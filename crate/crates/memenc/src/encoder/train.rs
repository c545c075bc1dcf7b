//! Joint training: the classifier descends cross-entropy on the client data
//! while both the classifier and a linear membership discriminator descend
//! the encoding loss over client and synthetic pools, driving the mapped
//! representations of members apart from nonmembers.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::encoder::discriminator::{encoding_loss, Discriminator};
use crate::encoder::mapping::{build_mapping, Mapping};
use crate::encoder::split::SplitDataset;
use crate::error::{Error, Result};
use crate::key::EncodingKey;
use crate::nn::{backprop, cross_entropy, FreezeMask, LossHead, MlpModel, OptimizerState};
use crate::rng::Rng;
use crate::syndata::gen_synthetic_data;

/// Sub-stream tag for discriminator initialization off the shuffle seed.
const STREAM_DISC_INIT: u64 = 0x44495343; // "DISC"

/// Trajectory evaluations are capped to this many strided records per pool.
const EVAL_CAP: usize = 2000;

/// Hyper-parameters of one encoding (or baseline) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingConfig {
    /// Outer-loop length, counted in epochs of `ceil(|train| / batch_size)`
    /// iterations.
    pub epochs: usize,
    pub batch_size: usize,
    /// Discriminator/encoder steps per iteration (k). Zero disables the
    /// encoding player entirely, leaving plain classifier training.
    pub disc_steps: usize,
    /// Classifier-step learning rate.
    pub lr_model: f64,
    /// Rate for the joint encoding step, applied to both the classifier and
    /// the discriminator.
    pub lr_disc: f64,
    pub momentum: f64,
    /// 1-based epochs at whose start every learning rate is scaled by
    /// `decay_factor`.
    #[serde(default)]
    pub decay_epochs: Vec<usize>,
    #[serde(default = "default_decay_factor")]
    pub decay_factor: f64,
    /// Oversampling weight for synthetic records inside each stratified
    /// discriminator half-batch; 1.0 samples pools proportionally to size.
    #[serde(default = "default_synthetic_ratio")]
    pub synthetic_ratio: f64,
    /// Seed for batch sampling, shuffling, and discriminator init.
    pub shuffle_seed: u64,
}

fn default_decay_factor() -> f64 {
    0.1
}

fn default_synthetic_ratio() -> f64 {
    1.0
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self {
            epochs: 80,
            batch_size: 32,
            disc_steps: 1,
            lr_model: 0.02,
            lr_disc: 0.01,
            momentum: 0.9,
            decay_epochs: Vec::new(),
            decay_factor: 0.1,
            synthetic_ratio: 1.0,
            shuffle_seed: 0,
        }
    }
}

impl EncodingConfig {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be >= 1"));
        }
        if self.lr_model <= 0.0 || self.lr_disc <= 0.0 {
            return Err(Error::invalid("learning rates must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("momentum must be in [0, 1)"));
        }
        if self.synthetic_ratio <= 0.0 {
            return Err(Error::invalid("synthetic ratio must be positive"));
        }
        if self.decay_factor <= 0.0 {
            return Err(Error::invalid("decay factor must be positive"));
        }
        Ok(())
    }
}

/// Per-epoch loss trajectories and final quality of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodingReport {
    /// Cross-entropy on the encoded members, per epoch.
    pub ce_members: Vec<f64>,
    /// Cross-entropy on the client nonmembers, per epoch.
    pub ce_nonmembers: Vec<f64>,
    /// Cross-entropy on the hold-out test set, per epoch.
    pub ce_test: Vec<f64>,
    /// Encoding loss over the client data, per epoch. Empty for baseline
    /// runs.
    pub enc_loss: Vec<f64>,
    pub test_accuracy: f64,
    pub elapsed: Duration,
}

/// Both pools the discriminator samples from, with client records first so
/// membership bits are decidable by index.
struct Pools<'a> {
    members: Vec<&'a [f64]>,
    nonmembers: Vec<&'a [f64]>,
    client_members: usize,
    client_nonmembers: usize,
}

impl<'a> Pools<'a> {
    fn assemble(split: &'a SplitDataset, synth_m: &'a [Vec<f64>], synth_nm: &'a [Vec<f64>]) -> Self {
        let members: Vec<&[f64]> = split
            .members
            .features()
            .iter()
            .map(|v| v.as_slice())
            .chain(synth_m.iter().map(|v| v.as_slice()))
            .collect();
        let nonmembers: Vec<&[f64]> = split
            .nonmembers
            .features()
            .iter()
            .map(|v| v.as_slice())
            .chain(synth_nm.iter().map(|v| v.as_slice()))
            .collect();
        Self {
            members,
            nonmembers,
            client_members: split.members.len(),
            client_nonmembers: split.nonmembers.len(),
        }
    }

    /// Stratified batch: half members, half nonmembers; within each half
    /// synthetic records are drawn with probability proportional to
    /// `ratio * synthetic_pool_size`.
    fn sample_batch(&self, batch_size: usize, ratio: f64, rng: &mut Rng) -> Vec<(&'a [f64], bool)> {
        let member_half = batch_size / 2;
        let nonmember_half = batch_size - member_half;
        let mut batch = Vec::with_capacity(batch_size);
        self.sample_half(true, member_half, ratio, rng, &mut batch);
        self.sample_half(false, nonmember_half, ratio, rng, &mut batch);
        batch
    }

    fn sample_half(
        &self,
        member: bool,
        count: usize,
        ratio: f64,
        rng: &mut Rng,
        out: &mut Vec<(&'a [f64], bool)>,
    ) {
        let (pool, client_count) = if member {
            (&self.members, self.client_members)
        } else {
            (&self.nonmembers, self.client_nonmembers)
        };
        let synth_count = pool.len() - client_count;
        let p_synth = if client_count == 0 {
            1.0
        } else if synth_count == 0 {
            0.0
        } else {
            let weighted = ratio * synth_count as f64;
            weighted / (weighted + client_count as f64)
        };
        for _ in 0..count {
            let idx = if rng.uniform() < p_synth {
                client_count + rng.index(synth_count)
            } else {
                rng.index(client_count)
            };
            out.push((pool[idx], member));
        }
    }
}

/// Run the full encoding loop. Returns the trained classifier, the final
/// encoding-phase discriminator (diagnostic only; decoding retrains its own
/// from the key), and the loss trajectories.
pub fn membership_encoding(
    split: &SplitDataset,
    key: &EncodingKey,
    model: MlpModel,
    cfg: &EncodingConfig,
) -> Result<(MlpModel, Discriminator, EncodingReport)> {
    membership_encoding_frozen(split, key, model, cfg, None)
}

/// Encoding loop with an optional per-parameter freeze mask (used by
/// adversarial pruning to keep pruned weights at exactly zero).
pub fn membership_encoding_frozen(
    split: &SplitDataset,
    key: &EncodingKey,
    mut model: MlpModel,
    cfg: &EncodingConfig,
    freeze: Option<FreezeMask>,
) -> Result<(MlpModel, Discriminator, EncodingReport)> {
    cfg.validate()?;
    if cfg.batch_size < 2 && cfg.disc_steps > 0 {
        return Err(Error::invalid(
            "encoding needs batch_size >= 2 for stratified member/nonmember halves",
        ));
    }
    if split.dim() != key.q {
        return Err(Error::KeyMismatch(format!(
            "key q={} but dataset dimension is {}",
            key.q,
            split.dim()
        )));
    }
    if model.input_dim() != split.dim() {
        return Err(Error::Shape {
            expected: split.dim(),
            got: model.input_dim(),
        });
    }

    let start = Instant::now();
    let synth = gen_synthetic_data(key)?;
    let mapping = build_mapping(&model, key)?;
    let pools = Pools::assemble(split, &synth.members, &synth.nonmembers);

    let mut rng = Rng::new(cfg.shuffle_seed);
    let mut disc = Discriminator::with_rng(
        mapping.dim(),
        &mut Rng::with_stream(cfg.shuffle_seed, STREAM_DISC_INIT),
    );

    let mut opt_ce = OptimizerState::new(&model, cfg.lr_model, cfg.momentum)?;
    let mut opt_enc = OptimizerState::new(&model, cfg.lr_disc, cfg.momentum)?;
    if let Some(mask) = freeze {
        opt_ce.set_freeze(mask.clone());
        opt_enc.set_freeze(mask);
    }
    let mut disc_vel_w = vec![0.0; mapping.dim()];
    let mut disc_vel_b = 0.0;
    let mut disc_lr = cfg.lr_disc;

    let train_len = split.train_len();
    let iters_per_epoch = train_len.div_ceil(cfg.batch_size);
    let mut report = EncodingReport {
        ce_members: Vec::with_capacity(cfg.epochs),
        ce_nonmembers: Vec::with_capacity(cfg.epochs),
        ce_test: Vec::with_capacity(cfg.epochs),
        enc_loss: Vec::with_capacity(cfg.epochs),
        test_accuracy: f64::NAN,
        elapsed: Duration::ZERO,
    };

    let mut order: Vec<usize> = (0..train_len).collect();
    let mut iteration = 0usize;
    for epoch in 1..=cfg.epochs {
        if cfg.decay_epochs.contains(&epoch) {
            opt_ce.decay(cfg.decay_factor);
            opt_enc.decay(cfg.decay_factor);
            disc_lr *= cfg.decay_factor;
        }
        rng.shuffle(&mut order);

        for iter in 0..iters_per_epoch {
            for _ in 0..cfg.disc_steps {
                iteration += 1;
                let batch = pools.sample_batch(cfg.batch_size, cfg.synthetic_ratio, &mut rng);
                let loss = encoding_step(
                    &mut model,
                    &mapping,
                    &mut disc,
                    &batch,
                    &mut opt_enc,
                    &mut disc_vel_w,
                    &mut disc_vel_b,
                    disc_lr,
                    cfg.momentum,
                )?;
                if !loss.is_finite() {
                    return Err(Error::Diverged {
                        iteration,
                        what: "encoding loss",
                    });
                }
            }

            iteration += 1;
            let lo = iter * cfg.batch_size;
            let hi = (lo + cfg.batch_size).min(train_len);
            classifier_step(&mut model, split, &order[lo..hi], &mut opt_ce, iteration)?;
        }

        record_epoch(&mut report, &model, split, Some((&mapping, &disc)));
    }

    report.test_accuracy = accuracy(&model, &split.test);
    report.elapsed = start.elapsed();
    Ok((model, disc, report))
}

/// The identical training loop with the discriminator machinery removed;
/// the reference point for accuracy-drop measurements.
pub fn train_baseline(
    split: &SplitDataset,
    mut model: MlpModel,
    cfg: &EncodingConfig,
) -> Result<(MlpModel, EncodingReport)> {
    cfg.validate()?;
    if model.input_dim() != split.dim() {
        return Err(Error::Shape {
            expected: split.dim(),
            got: model.input_dim(),
        });
    }
    let start = Instant::now();
    let mut rng = Rng::new(cfg.shuffle_seed);
    let mut opt_ce = OptimizerState::new(&model, cfg.lr_model, cfg.momentum)?;
    let train_len = split.train_len();
    let iters_per_epoch = train_len.div_ceil(cfg.batch_size);

    let mut report = EncodingReport {
        ce_members: Vec::with_capacity(cfg.epochs),
        ce_nonmembers: Vec::with_capacity(cfg.epochs),
        ce_test: Vec::with_capacity(cfg.epochs),
        enc_loss: Vec::new(),
        test_accuracy: f64::NAN,
        elapsed: Duration::ZERO,
    };

    let mut order: Vec<usize> = (0..train_len).collect();
    let mut iteration = 0usize;
    for epoch in 1..=cfg.epochs {
        if cfg.decay_epochs.contains(&epoch) {
            opt_ce.decay(cfg.decay_factor);
        }
        rng.shuffle(&mut order);
        for iter in 0..iters_per_epoch {
            iteration += 1;
            let lo = iter * cfg.batch_size;
            let hi = (lo + cfg.batch_size).min(train_len);
            classifier_step(&mut model, split, &order[lo..hi], &mut opt_ce, iteration)?;
        }
        record_epoch(&mut report, &model, split, None);
    }

    report.test_accuracy = accuracy(&model, &split.test);
    report.elapsed = start.elapsed();
    Ok((model, report))
}

/// One joint descent step on the encoding loss: gradients for the classifier
/// and the discriminator are computed from the same forward pass, then both
/// are updated.
#[allow(clippy::too_many_arguments)]
fn encoding_step(
    model: &mut MlpModel,
    mapping: &Mapping,
    disc: &mut Discriminator,
    batch: &[(&[f64], bool)],
    opt_enc: &mut OptimizerState,
    disc_vel_w: &mut [f64],
    disc_vel_b: &mut f64,
    disc_lr: f64,
    momentum: f64,
) -> Result<f64> {
    let b = batch.len() as f64;
    let dim = mapping.dim();
    let mut dhat = Vec::with_capacity(batch.len());
    let mut z = Vec::with_capacity(batch.len());
    let mut grad_w = vec![0.0; dim];
    let mut grad_b = 0.0;
    let mut all_acts = Vec::with_capacity(batch.len());
    let mut heads = Vec::with_capacity(batch.len());

    for &(x, is_member) in batch {
        let acts = model.forward_all(x)?;
        let h = mapping.apply(&acts);
        let p = disc.prob(&h);
        let delta = p - if is_member { 1.0 } else { 0.0 };
        for (gw, hi) in grad_w.iter_mut().zip(&h) {
            *gw += delta * hi / b;
        }
        grad_b += delta / b;
        // dL_i/dh = delta * w; the backprop mean applies the 1/b itself.
        let dh: Vec<f64> = disc.weights.iter().map(|w| delta * w).collect();
        let (layer, grad) = mapping.backward(&acts, &dh);
        all_acts.push(acts);
        heads.push((x, LossHead::ActivationGrad { layer, grad }));
        dhat.push(p);
        z.push(is_member);
    }

    let with_acts: Vec<(&[f64], &crate::nn::LayerActivations, LossHead)> = heads
        .into_iter()
        .zip(&all_acts)
        .map(|((x, head), acts)| (x, acts, head))
        .collect();
    let theta_grads = crate::nn::backprop_precomputed(model, &with_acts)?;
    opt_enc.sgd_step(model, &theta_grads)?;

    for i in 0..dim {
        disc_vel_w[i] = momentum * disc_vel_w[i] + grad_w[i];
        disc.weights[i] -= disc_lr * disc_vel_w[i];
    }
    *disc_vel_b = momentum * *disc_vel_b + grad_b;
    disc.bias -= disc_lr * *disc_vel_b;

    encoding_loss(&dhat, &z)
}

/// One cross-entropy step over the given rows of the (member ++ nonmember)
/// training set.
fn classifier_step(
    model: &mut MlpModel,
    split: &SplitDataset,
    rows: &[usize],
    opt: &mut OptimizerState,
    iteration: usize,
) -> Result<()> {
    let m = split.members.len();
    let batch: Vec<(&[f64], LossHead)> = rows
        .iter()
        .map(|&i| {
            let (x, y) = if i < m {
                (split.members.feature(i), split.members.label(i))
            } else {
                (split.nonmembers.feature(i - m), split.nonmembers.label(i - m))
            };
            (x, LossHead::CrossEntropy { class: y })
        })
        .collect();
    let grads = backprop(model, &batch)?;
    if !grads.is_finite() {
        return Err(Error::Diverged {
            iteration,
            what: "classification gradient",
        });
    }
    opt.sgd_step(model, &grads)
}

fn strided(len: usize, cap: usize) -> impl Iterator<Item = usize> {
    let step = if len > cap { len.div_ceil(cap) } else { 1 };
    (0..len).step_by(step.max(1))
}

fn mean_ce(model: &MlpModel, data: &crate::data::LabeledDataset) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for i in strided(data.len(), EVAL_CAP) {
        let probs = model.forward_probs(data.feature(i)).expect("dims checked");
        total += cross_entropy(&probs, data.label(i)).expect("label checked");
        count += 1;
    }
    total / count as f64
}

fn accuracy(model: &MlpModel, data: &crate::data::LabeledDataset) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    let correct = data
        .iter()
        .filter(|(x, y)| model.predict(x).expect("dims checked") == *y)
        .count();
    correct as f64 / data.len() as f64
}

fn record_epoch(
    report: &mut EncodingReport,
    model: &MlpModel,
    split: &SplitDataset,
    enc: Option<(&Mapping, &Discriminator)>,
) {
    report.ce_members.push(mean_ce(model, &split.members));
    report.ce_nonmembers.push(mean_ce(model, &split.nonmembers));
    report.ce_test.push(mean_ce(model, &split.test));
    if let Some((mapping, disc)) = enc {
        let mut dhat = Vec::new();
        let mut z = Vec::new();
        for i in strided(split.members.len(), EVAL_CAP) {
            let acts = model.forward_all(split.members.feature(i)).expect("dims");
            dhat.push(disc.prob(&mapping.apply(&acts)));
            z.push(true);
        }
        for i in strided(split.nonmembers.len(), EVAL_CAP) {
            let acts = model
                .forward_all(split.nonmembers.feature(i))
                .expect("dims");
            dhat.push(disc.prob(&mapping.apply(&acts)));
            z.push(false);
        }
        report
            .enc_loss
            .push(encoding_loss(&dhat, &z).unwrap_or(f64::NAN));
    }
}
