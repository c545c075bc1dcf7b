use std::path::PathBuf;

use anyhow::{Context as _, Result};
use clap::Args;
use serde::Deserialize;

use crate::commands::evaluate::decode_metrics;
use crate::context::resolve;
use crate::output::write_csv;

/// A sweep file: a base run config plus axes of overrides. Cells are the
/// Cartesian product in declaration order (the last axis varies fastest).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    base: serde_json::Value,
    axes: Vec<Axis>,
    #[serde(default)]
    workers: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Axis {
    /// Dot path into the run config, e.g. `training.epochs` or
    /// `model.hidden`.
    path: String,
    values: Vec<serde_json::Value>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep file (base config + axes).
    #[arg(long)]
    config: PathBuf,
    /// Metrics CSV output, one row per cell in declared order.
    #[arg(long)]
    out: PathBuf,
    /// Parallel worker threads (defaults to the sweep file, then 1).
    #[arg(long)]
    workers: Option<usize>,
}

fn set_path(target: &mut serde_json::Value, path: &str, value: serde_json::Value) -> Result<()> {
    let mut cursor = target;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cursor
            .as_object_mut()
            .with_context(|| format!("path '{path}' does not reach an object at '{part}'"))?;
        if i + 1 == parts.len() {
            obj.insert((*part).to_string(), value);
            return Ok(());
        }
        cursor = obj
            .entry((*part).to_string())
            .or_insert_with(|| serde_json::json!({}));
    }
    unreachable!("empty path");
}

/// One complete encode + decode + eval run.
fn run_cell(config: memenc::config::RunConfig) -> Result<crate::output::MetricsRow> {
    let ctx = resolve(config)?;
    let model = ctx.cfg.model.build(ctx.split.dim(), ctx.split.classes())?;
    let (trained, _, _) =
        memenc::encoder::membership_encoding(&ctx.split, &ctx.key, model, &ctx.cfg.training)?;
    decode_metrics(&ctx, &trained)
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    let sweep: SweepConfig = serde_json::from_str(
        &std::fs::read_to_string(&args.config)
            .with_context(|| format!("reading {}", args.config.display()))?,
    )
    .context("parsing sweep config")?;
    anyhow::ensure!(!sweep.axes.is_empty(), "sweep needs at least one axis");

    // Materialize every cell's config up front, in declared order.
    let mut cells: Vec<(Vec<String>, memenc::config::RunConfig)> = Vec::new();
    let sizes: Vec<usize> = sweep.axes.iter().map(|a| a.values.len()).collect();
    anyhow::ensure!(
        sizes.iter().all(|&s| s > 0),
        "every axis needs at least one value"
    );
    let total: usize = sizes.iter().product();
    for cell in 0..total {
        let mut json = sweep.base.clone();
        let mut labels = Vec::with_capacity(sweep.axes.len());
        let mut rest = cell;
        // Odometer order: last axis fastest.
        for (axis, &size) in sweep.axes.iter().zip(&sizes).rev() {
            let pick = rest % size;
            rest /= size;
            labels.push(axis.values[pick].to_string());
            set_path(&mut json, &axis.path, axis.values[pick].clone())?;
        }
        labels.reverse();
        let cfg: memenc::config::RunConfig = serde_json::from_value(json)
            .with_context(|| format!("cell {cell}: invalid run config after overrides"))?;
        cells.push((labels, cfg));
    }

    let workers = args.workers.or(sweep.workers).unwrap_or(1).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building worker pool")?;

    // Cells run in parallel; collect preserves declared order.
    let results: Vec<Result<crate::output::MetricsRow>> = pool.install(|| {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|(_, cfg)| run_cell(cfg.clone()))
            .collect()
    });

    let mut header = String::from("cell");
    for axis in &sweep.axes {
        header.push(',');
        header.push_str(&axis.path);
    }
    header.push_str(",test_acc,enc_precision,enc_recall,enc_auc");

    let mut rows = Vec::with_capacity(total);
    for (i, ((labels, _), result)) in cells.iter().zip(results).enumerate() {
        let row = result.with_context(|| format!("sweep cell {i} failed"))?;
        rows.push(format!(
            "{},{},{},{},{},{}",
            i,
            labels.join(","),
            row.test_acc,
            row.enc_precision,
            row.enc_recall,
            row.enc_auc
        ));
    }
    write_csv(&args.out, &header, &rows)?;
    println!("swept {total} cells with {workers} workers -> {}", args.out.display());
    Ok(())
}
