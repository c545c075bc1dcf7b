use std::path::PathBuf;

use anyhow::{Context as _, Result};
use clap::Args;
use memenc::checkpoint::{key_fingerprint, save_checkpoint, CheckpointMeta};
use memenc::data::save_csv_dataset;

use crate::context::{resolve, ConfigArgs};
use crate::output::write_report_csv;

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Trained model output.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Loss-trajectory CSV output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Encoded member records output (dataset CSV, usable as a claim file).
    #[arg(long)]
    members: Option<PathBuf>,
}

pub fn encode(args: EncodeArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let ctx = resolve(cfg)?;
    let model = ctx
        .cfg
        .model
        .build(ctx.split.dim(), ctx.split.classes())
        .context("building model")?;

    let (trained, _disc, report) =
        memenc::encoder::membership_encoding(&ctx.split, &ctx.key, model, &ctx.cfg.training)?;

    let meta = CheckpointMeta {
        key_fingerprint: Some(key_fingerprint(ctx.key.seed)),
        config: Some(serde_json::to_value(&ctx.cfg)?),
    };
    save_checkpoint(&trained, &meta, &args.checkpoint)?;
    if let Some(path) = &args.report {
        write_report_csv(path, &report)?;
    }
    if let Some(path) = &args.members {
        save_csv_dataset(path, &ctx.split.members)?;
    }
    println!(
        "encoded {} members into {} (test acc {:.4}, {} epochs in {:.1?})",
        ctx.split.members.len(),
        args.checkpoint.display(),
        report.test_accuracy,
        ctx.cfg.training.epochs,
        report.elapsed,
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct TrainBaselineArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn train_baseline(args: TrainBaselineArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let ctx = resolve(cfg)?;
    let model = ctx
        .cfg
        .model
        .build(ctx.split.dim(), ctx.split.classes())
        .context("building model")?;
    let (trained, report) =
        memenc::encoder::train_baseline(&ctx.split, model, &ctx.cfg.training)?;
    let meta = CheckpointMeta {
        key_fingerprint: None,
        config: Some(serde_json::to_value(&ctx.cfg)?),
    };
    save_checkpoint(&trained, &meta, &args.checkpoint)?;
    if let Some(path) = &args.report {
        write_report_csv(path, &report)?;
    }
    println!(
        "baseline test acc {:.4} -> {}",
        report.test_accuracy,
        args.checkpoint.display()
    );
    Ok(())
}
