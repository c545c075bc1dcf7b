use std::path::PathBuf;

use anyhow::{Context as _, Result};
use clap::Args;
use memenc::checkpoint::{key_fingerprint, load_checkpoint, save_checkpoint, CheckpointMeta};
use memenc::data::LabeledDataset;
use memenc::decoder::membership_scores;
use memenc::metrics::{auc, precision_recall, test_accuracy, ScoreSet};
use memenc::robustness::{
    adversarial_prune, magnitude_prune, mask_input, transfer_finetune, ImageGeometry, MaskMode,
    MaskSpec, PruneScope, PruneSpec, TransferConfig,
};

use crate::commands::evaluate::{decode_metrics, reconstruct};
use crate::context::{resolve, ConfigArgs};
use crate::output::write_csv;

fn scope_of(s: &str) -> Result<PruneScope> {
    match s {
        "global" => Ok(PruneScope::Global),
        "per-layer" => Ok(PruneScope::PerLayer),
        other => anyhow::bail!("unknown prune scope '{other}' (global | per-layer)"),
    }
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Fraction of weights to zero.
    #[arg(long)]
    p: f64,
    #[arg(long, default_value = "global")]
    scope: String,
    /// Pruned checkpoint output.
    #[arg(long)]
    out: PathBuf,
    /// Metrics row (p,test_acc,precision,recall,auc) output.
    #[arg(long)]
    metrics_out: Option<PathBuf>,
}

pub fn prune(args: PruneArgs) -> Result<()> {
    let ctx = resolve(args.config.load()?)?;
    let (model, meta) = load_checkpoint(&args.checkpoint)?;
    let spec = PruneSpec {
        fraction: args.p,
        scope: scope_of(&args.scope)?,
    };
    let (pruned, indices) = magnitude_prune(&model, &spec)?;
    save_checkpoint(&pruned, &meta, &args.out)?;
    let row = decode_metrics(&ctx, &pruned)?;
    if let Some(path) = &args.metrics_out {
        write_csv(
            path,
            "p,test_acc,enc_precision,enc_recall,enc_auc",
            &[format!(
                "{},{},{},{},{}",
                args.p, row.test_acc, row.enc_precision, row.enc_recall, row.enc_auc
            )],
        )?;
    }
    println!(
        "pruned {} weights (p={}): test_acc {:.4} auc {:.4} -> {}",
        indices.len(),
        args.p,
        row.test_acc,
        row.enc_auc,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct AdvPruneArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value = "global")]
    scope: String,
    /// Encoding-aware fine-tuning epochs after pruning.
    #[arg(long, default_value_t = 20)]
    finetune_epochs: usize,
    /// Learning rate for both players during fine-tuning.
    #[arg(long, default_value_t = 0.001)]
    finetune_lr: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    metrics_out: Option<PathBuf>,
}

pub fn adv_prune(args: AdvPruneArgs) -> Result<()> {
    let ctx = resolve(args.config.load()?)?;
    let (model, _) = load_checkpoint(&args.checkpoint)?;
    let spec = PruneSpec {
        fraction: args.p,
        scope: scope_of(&args.scope)?,
    };
    let mut finetune = ctx.cfg.training.clone();
    finetune.epochs = args.finetune_epochs;
    finetune.lr_model = args.finetune_lr;
    finetune.lr_disc = args.finetune_lr;
    finetune.decay_epochs = Vec::new();

    let (tuned, report, indices) =
        adversarial_prune(&model, &spec, &ctx.split, &ctx.key, &finetune)?;
    let meta = CheckpointMeta {
        key_fingerprint: Some(key_fingerprint(ctx.key.seed)),
        config: Some(serde_json::to_value(&ctx.cfg)?),
    };
    save_checkpoint(&tuned, &meta, &args.out)?;
    let row = decode_metrics(&ctx, &tuned)?;
    if let Some(path) = &args.metrics_out {
        write_csv(
            path,
            "p,test_acc,enc_precision,enc_recall,enc_auc",
            &[format!(
                "{},{},{},{},{}",
                args.p, row.test_acc, row.enc_precision, row.enc_recall, row.enc_auc
            )],
        )?;
    }
    println!(
        "adversarially pruned {} weights (p={}), finetuned {} epochs: test_acc {:.4} auc {:.4} -> {}",
        indices.len(),
        args.p,
        args.finetune_epochs,
        report.test_accuracy,
        row.enc_auc,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct FinetuneArgs {
    /// Original run config (provides the key and original data for the
    /// post-transfer encoding measurement).
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Dataset config JSON for the new task (a `dataset` object).
    #[arg(long)]
    new_dataset: PathBuf,
    #[arg(long, default_value_t = 60)]
    finetune_epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    finetune_lr: f64,
    #[arg(long, default_value_t = 32)]
    finetune_batch_size: usize,
    #[arg(long, default_value_t = 0)]
    head_seed: u64,
    #[arg(long, default_value_t = 0)]
    finetune_shuffle_seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Metrics row for the ORIGINAL encoding after transfer.
    #[arg(long)]
    metrics_out: Option<PathBuf>,
}

pub fn finetune(args: FinetuneArgs) -> Result<()> {
    let ctx = resolve(args.config.load()?)?;
    let (model, _) = load_checkpoint(&args.checkpoint)?;
    let dataset_cfg: memenc::config::DatasetConfig = serde_json::from_str(
        &std::fs::read_to_string(&args.new_dataset)
            .with_context(|| format!("reading {}", args.new_dataset.display()))?,
    )
    .context("parsing new dataset config")?;
    let wrapper = memenc::config::RunConfig {
        dataset: dataset_cfg,
        ..ctx.cfg.clone()
    };
    let (new_train, new_test, _) = wrapper.load_dataset()?;

    let tcfg = TransferConfig {
        epochs: args.finetune_epochs,
        learning_rate: args.finetune_lr,
        momentum: 0.9,
        batch_size: args.finetune_batch_size,
        head_seed: args.head_seed,
        shuffle_seed: args.finetune_shuffle_seed,
    };
    let transferred = transfer_finetune(&model, &new_train, &tcfg)?;
    save_checkpoint(&transferred, &CheckpointMeta::default(), &args.out)?;

    let new_acc = test_accuracy(&transferred, &new_test)?;
    let row = decode_metrics(&ctx, &transferred)?;
    if let Some(path) = &args.metrics_out {
        write_csv(
            path,
            "epochs,new_test_acc,enc_precision,enc_recall,enc_auc",
            &[format!(
                "{},{},{},{},{}",
                args.finetune_epochs, new_acc, row.enc_precision, row.enc_recall, row.enc_auc
            )],
        )?;
    }
    println!(
        "transferred to new task ({} classes): new test acc {:.4}, original encoding auc {:.4} -> {}",
        new_train.classes(),
        new_acc,
        row.enc_auc,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct MaskEvalArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Image geometry (defaults to IDX geometry when the dataset is IDX).
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long, default_value_t = 1)]
    channels: usize,
    /// center | boundary.
    #[arg(long, default_value = "center")]
    mode: String,
    /// Comma-separated mask widths.
    #[arg(long, default_value = "0,2,4")]
    widths: String,
    #[arg(long)]
    out: PathBuf,
}

/// Decode redacted inputs: mask the member and test records at each width
/// and measure precision/recall/AUC plus masked test accuracy.
pub fn mask_eval(args: MaskEvalArgs) -> Result<()> {
    let ctx = resolve(args.config.load()?)?;
    let (model, _) = load_checkpoint(&args.checkpoint)?;
    let geometry = match (args.height, args.width) {
        (Some(h), Some(w)) => ImageGeometry::new(h, w, args.channels),
        _ => ctx.geometry.context(
            "--height/--width are required when the dataset is not image-shaped",
        )?,
    };
    anyhow::ensure!(
        geometry.len() == ctx.split.dim(),
        "geometry {}x{}x{} does not match feature dimension {}",
        geometry.height,
        geometry.width,
        geometry.channels,
        ctx.split.dim()
    );
    let widths: Vec<usize> = args
        .widths
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse())
        .collect::<std::result::Result<_, _>>()
        .context("parsing --widths")?;

    let (oracle, d) = reconstruct(&ctx, model.clone())?;

    let mask_all = |records: &[Vec<f64>], spec: &MaskSpec| -> Result<Vec<Vec<f64>>> {
        records
            .iter()
            .map(|x| Ok(mask_input(x, spec)?))
            .collect::<Result<Vec<_>>>()
    };

    let mut rows = Vec::new();
    for &w in &widths {
        let mode = match args.mode.as_str() {
            "center" => MaskMode::Center { w },
            "boundary" => MaskMode::Boundary { w },
            other => anyhow::bail!("unknown mask mode '{other}' (center | boundary)"),
        };
        let spec = MaskSpec { geometry, mode };
        let pos_masked = mask_all(ctx.split.members.features(), &spec)?;
        let neg_masked = mask_all(ctx.split.test.features(), &spec)?;
        let pos = membership_scores(&d, oracle.as_ref(), &pos_masked)?;
        let neg = membership_scores(&d, oracle.as_ref(), &neg_masked)?;
        let scores = ScoreSet::from_pools(&pos, &neg)?;
        let (precision, recall) = precision_recall(&scores, 0.5);
        let masked_test = LabeledDataset::new(
            neg_masked,
            ctx.split.test.labels().to_vec(),
            ctx.split.test.classes(),
        )?;
        let acc = test_accuracy(&model, &masked_test)?;
        rows.push(format!(
            "{},{},{},{},{},{}",
            args.mode,
            w,
            acc,
            precision,
            recall,
            auc(&scores)
        ));
    }
    write_csv(&args.out, "mode,w,test_acc,enc_precision,enc_recall,enc_auc", &rows)?;
    println!("wrote {} mask rows to {}", rows.len(), args.out.display());
    Ok(())
}
