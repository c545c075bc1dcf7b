use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context as _, Result};
use clap::Args;
use memenc::decoder::{
    membership_scores, oracle_for, reconstruct_discriminator, InferenceDiscriminator, ModelOracle,
};
use memenc::metrics::{auc, precision_recall, test_accuracy, ScoreSet};
use memenc::nn::MlpModel;
use memenc::syndata::gen_synthetic_data;

use crate::context::{resolve, ConfigArgs, Context};
use crate::output::{write_csv, write_metrics_row, MetricsRow};

/// Reconstruct the discriminator for a model under the context's key.
pub fn reconstruct(
    ctx: &Context,
    model: MlpModel,
) -> Result<(Box<dyn ModelOracle>, InferenceDiscriminator)> {
    let oracle = oracle_for(model, &ctx.key)?;
    let d = reconstruct_discriminator(
        oracle.as_ref(),
        &ctx.key,
        ctx.cfg.decoder.seed,
        &ctx.cfg.decoder.inference,
    )?;
    Ok((oracle, d))
}

/// Decode a model against its context and compute the Table-1 row:
/// positives are the encoded members, negatives the hold-out test records.
pub fn decode_metrics(ctx: &Context, model: &MlpModel) -> Result<MetricsRow> {
    let (oracle, d) = reconstruct(ctx, model.clone())?;
    let pos = membership_scores(&d, oracle.as_ref(), ctx.split.members.features())?;
    let neg = membership_scores(&d, oracle.as_ref(), ctx.split.test.features())?;
    let scores = ScoreSet::from_pools(&pos, &neg)?;
    let (enc_precision, enc_recall) = precision_recall(&scores, 0.5);
    Ok(MetricsRow {
        test_acc: test_accuracy(model, &ctx.split.test)?,
        enc_precision,
        enc_recall,
        enc_auc: auc(&scores),
    })
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Model to evaluate.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Metrics output (CSV row, or JSON with --json).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let ctx = resolve(args.config.load()?)?;
    let (model, _) = memenc::checkpoint::load_checkpoint(&args.checkpoint)
        .with_context(|| format!("loading checkpoint {}", args.checkpoint.display()))?;
    let row = decode_metrics(&ctx, &model)?;
    write_metrics_row(&args.out, &row, args.json)?;
    println!(
        "test_acc {:.4}  precision {:.3}  recall {:.3}  auc {:.4}",
        row.test_acc, row.enc_precision, row.enc_recall, row.enc_auc
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct ExportRepsArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Representation CSV: pool,z,h0..h{d-1}.
    #[arg(long)]
    out: PathBuf,
    /// Cap on records exported per pool.
    #[arg(long, default_value_t = 2000)]
    limit: usize,
}

/// Dump the mapped representations of all four pools plus the test set so
/// external tools can render projection plots.
pub fn export_reps(args: ExportRepsArgs) -> Result<()> {
    let ctx = resolve(args.config.load()?)?;
    let (model, _) = memenc::checkpoint::load_checkpoint(&args.checkpoint)?;
    let oracle = oracle_for(model, &ctx.key)?;
    let synth = gen_synthetic_data(&ctx.key)?;

    let mut header = String::from("pool,z");
    for j in 0..oracle.dim() {
        write!(header, ",h{j}")?;
    }
    let mut rows = Vec::new();
    let mut dump = |pool: &str, z: u8, records: &[Vec<f64>]| -> Result<()> {
        for x in records.iter().take(args.limit) {
            let h = oracle.query(x)?;
            let mut row = format!("{pool},{z}");
            for v in &h {
                write!(row, ",{v}")?;
            }
            rows.push(row);
        }
        Ok(())
    };
    dump("synthetic-member", 1, &synth.members)?;
    dump("synthetic-nonmember", 0, &synth.nonmembers)?;
    dump("client-member", 1, ctx.split.members.features())?;
    dump("client-nonmember", 0, ctx.split.nonmembers.features())?;
    dump("test", 0, ctx.split.test.features())?;
    write_csv(&args.out, &header, &rows)?;
    println!("wrote {} representations to {}", rows.len(), args.out.display());
    Ok(())
}
