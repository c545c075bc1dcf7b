use std::path::PathBuf;

use anyhow::{bail, Context as _, Result};
use clap::Args;
use memenc::decoder::{
    membership_scores, oracle_for, reconstruct_discriminator, verify_watermark, HttpOracle,
    InferenceDiscriminator, ModelOracle, DEFAULT_SIGNIFICANCE, DEFAULT_TAU,
};

use crate::context::{load_records, ConfigArgs};
use crate::output::{write_csv, write_json};

/// Oracle/discriminator assembly shared by decode and verify.
struct Decoder {
    oracle: Box<dyn ModelOracle>,
    discriminator: InferenceDiscriminator,
}

fn build_decoder(
    config: &ConfigArgs,
    checkpoint: Option<&PathBuf>,
    http_url: Option<&String>,
    http_classes: Option<usize>,
) -> Result<Decoder> {
    let cfg = config.load()?;
    let key_q;
    let oracle: Box<dyn ModelOracle> = match (checkpoint, http_url) {
        (Some(path), None) => {
            let (model, _meta) = memenc::checkpoint::load_checkpoint(path)
                .with_context(|| format!("loading checkpoint {}", path.display()))?;
            key_q = model.input_dim();
            oracle_for(model, &cfg.key.build(key_q))?
        }
        (None, Some(url)) => {
            let classes =
                http_classes.context("--classes is required with --http-url")?;
            let (train, _, _) = cfg.load_dataset()?;
            key_q = train.dim();
            Box::new(HttpOracle::new(url.clone(), classes)?)
        }
        (Some(_), Some(_)) => bail!("give either --checkpoint or --http-url, not both"),
        (None, None) => bail!("one of --checkpoint or --http-url is required"),
    };
    let key = cfg.key.build(key_q);
    let discriminator =
        reconstruct_discriminator(oracle.as_ref(), &key, cfg.decoder.seed, &cfg.decoder.inference)?;
    Ok(Decoder {
        oracle,
        discriminator,
    })
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Released model to decode.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Remote prediction API returning a JSON probability vector per POST.
    #[arg(long)]
    http_url: Option<String>,
    /// Class count of the remote API (required with --http-url).
    #[arg(long)]
    classes: Option<usize>,
    /// Records to score (dataset CSV; labels ignored).
    #[arg(long)]
    records: PathBuf,
    /// Scores CSV output.
    #[arg(long)]
    out: PathBuf,
}

pub fn decode(args: DecodeArgs) -> Result<()> {
    let decoder = build_decoder(
        &args.config,
        args.checkpoint.as_ref(),
        args.http_url.as_ref(),
        args.classes,
    )?;
    let records = load_records(&args.records, 1)?;
    let scores = membership_scores(
        &decoder.discriminator,
        decoder.oracle.as_ref(),
        records.features(),
    )?;
    let rows: Vec<String> = scores
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{i},{s}"))
        .collect();
    write_csv(&args.out, "index,score", &rows)?;
    let detected = scores.iter().filter(|&&s| s >= 0.5).count();
    println!(
        "scored {} records, {} >= 0.5, oracle queries {}",
        scores.len(),
        detected,
        decoder.oracle.query_count()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    http_url: Option<String>,
    #[arg(long)]
    classes: Option<usize>,
    /// Claimed encoded records (dataset CSV).
    #[arg(long)]
    claimed: PathBuf,
    /// Required detected fraction.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: f64,
    /// Binomial-test significance level.
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    significance: f64,
    /// Verdict JSON output.
    #[arg(long)]
    out: PathBuf,
}

pub fn verify(args: VerifyArgs) -> Result<()> {
    let decoder = build_decoder(
        &args.config,
        args.checkpoint.as_ref(),
        args.http_url.as_ref(),
        args.classes,
    )?;
    let claimed = load_records(&args.claimed, 1)?;
    let verdict = verify_watermark(
        &decoder.discriminator,
        decoder.oracle.as_ref(),
        claimed.features(),
        args.tau,
        args.significance,
    )?;
    write_json(&args.out, &verdict)?;
    println!(
        "{}: {}/{} detected (fraction {:.3}, tau {}), p = {:.3e}",
        if verdict.accept { "ACCEPT" } else { "REJECT" },
        verdict.detected,
        verdict.claimed,
        verdict.fraction,
        verdict.tau,
        verdict.p_value
    );
    Ok(())
}
