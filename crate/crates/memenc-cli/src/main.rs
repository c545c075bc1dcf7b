mod commands;
mod context;
mod output;

use clap::{Parser, Subcommand};

/// Membership encoding for feed-forward networks: train models that leak
/// keyed membership bits, decode them, verify watermarks, and measure
/// robustness.
#[derive(Parser)]
#[command(name = "memenc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump a key's synthetic member/nonmember mixtures to CSV.
    GenData(commands::gendata::GenDataArgs),
    /// Generate a seeded Gaussian-blob benchmark as train/test CSVs.
    GenBenchmark(commands::gendata::GenBenchmarkArgs),
    /// Train the no-encoding reference model from a run config.
    TrainBaseline(commands::encode::TrainBaselineArgs),
    /// Run membership encoding from a run config.
    Encode(commands::encode::EncodeArgs),
    /// Score records through a released model with the key.
    Decode(commands::decode::DecodeArgs),
    /// Verify a watermark claim against a released model.
    Verify(commands::decode::VerifyArgs),
    /// Emit the test-accuracy / precision / recall / AUC row for a model.
    Eval(commands::evaluate::EvalArgs),
    /// Magnitude-prune a checkpoint and measure the surviving encoding.
    Prune(commands::robust::PruneArgs),
    /// Prune, then fine-tune with the encoding loss and frozen zeros.
    AdvPrune(commands::robust::AdvPruneArgs),
    /// Transfer a checkpoint to a new task and measure the old encoding.
    Finetune(commands::robust::FinetuneArgs),
    /// Decode masked (redacted) inputs across a sweep of mask widths.
    MaskEval(commands::robust::MaskEvalArgs),
    /// Export mapped representations of every pool for projection plots.
    ExportReps(commands::evaluate::ExportRepsArgs),
    /// Run a Cartesian sweep of run configs, one metrics row per cell.
    Sweep(commands::sweep::SweepArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(args) => commands::gendata::gen_data(args),
        Command::GenBenchmark(args) => commands::gendata::gen_benchmark(args),
        Command::TrainBaseline(args) => commands::encode::train_baseline(args),
        Command::Encode(args) => commands::encode::encode(args),
        Command::Decode(args) => commands::decode::decode(args),
        Command::Verify(args) => commands::decode::verify(args),
        Command::Eval(args) => commands::evaluate::eval(args),
        Command::Prune(args) => commands::robust::prune(args),
        Command::AdvPrune(args) => commands::robust::adv_prune(args),
        Command::Finetune(args) => commands::robust::finetune(args),
        Command::MaskEval(args) => commands::robust::mask_eval(args),
        Command::ExportReps(args) => commands::evaluate::export_reps(args),
        Command::Sweep(args) => commands::sweep::sweep(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
