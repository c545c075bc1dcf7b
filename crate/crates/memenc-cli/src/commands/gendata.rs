use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use memenc::checkpoint::atomic_write;
use memenc::data::save_csv_dataset;
use memenc::key::{EncodingKey, MappingConfig};
use memenc::syndata::gen_synthetic_data;

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Secret key seed s.
    #[arg(long)]
    seed: u64,
    /// Synthetic points per mixture.
    #[arg(long)]
    n: usize,
    /// Feature dimension.
    #[arg(long)]
    q: usize,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Output CSV: set,f0..f{q-1}.
    #[arg(long)]
    out: PathBuf,
}

pub fn gen_data(args: GenDataArgs) -> Result<()> {
    let key = EncodingKey {
        seed: args.seed,
        n: args.n,
        q: args.q,
        alpha: args.alpha,
        beta: args.beta,
        mapping: MappingConfig::Blackbox,
    };
    let pair = gen_synthetic_data(&key)?;
    let mut body = String::from("set");
    for j in 0..args.q {
        write!(body, ",f{j}")?;
    }
    body.push('\n');
    for (name, pool) in [("member", &pair.members), ("nonmember", &pair.nonmembers)] {
        for x in pool {
            body.push_str(name);
            for v in x {
                write!(body, ",{v}")?;
            }
            body.push('\n');
        }
    }
    atomic_write(&args.out, body.as_bytes())?;
    println!(
        "wrote {} synthetic records ({} per mixture) to {}",
        2 * args.n,
        args.n,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct GenBenchmarkArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    classes: usize,
    #[arg(long)]
    per_class: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 6.0)]
    separation: f64,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
}

pub fn gen_benchmark(args: GenBenchmarkArgs) -> Result<()> {
    let (train, test) = memenc::data::gen_benchmark(
        args.seed,
        args.classes,
        args.per_class,
        args.dim,
        args.separation,
    )?;
    save_csv_dataset(&args.train_out, &train)?;
    save_csv_dataset(&args.test_out, &test)?;
    println!(
        "wrote {} train / {} test records to {} / {}",
        train.len(),
        test.len(),
        args.train_out.display(),
        args.test_out.display()
    );
    Ok(())
}
