//! Shared experiment context: a run config resolved against its data.

use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use clap::Args;
use memenc::config::{parse_arch, RunConfig, SelectionConfig};
use memenc::data::LabeledDataset;
use memenc::encoder::SplitDataset;
use memenc::key::{EncodingKey, MappingConfig};
use memenc::robustness::ImageGeometry;

/// `--config` plus the override flags shared by training commands.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Run configuration JSON.
    #[arg(long)]
    pub config: PathBuf,

    /// Override: train dataset CSV (switches the dataset source to CSV).
    #[arg(long, requires = "test_csv")]
    pub train_csv: Option<PathBuf>,
    /// Override: test dataset CSV.
    #[arg(long, requires = "train_csv")]
    pub test_csv: Option<PathBuf>,
    /// Override: model architecture string, e.g. mlp:128,64.
    #[arg(long)]
    pub arch: Option<String>,
    /// Override: model init seed.
    #[arg(long)]
    pub init_seed: Option<u64>,
    /// Override: secret key seed s.
    #[arg(long)]
    pub key_seed: Option<u64>,
    /// Override: synthetic points per mixture.
    #[arg(long)]
    pub key_n: Option<usize>,
    /// Override: uniform mean range lower bound.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Override: uniform mean range upper bound.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Override: mapping mode (whitebox | blackbox).
    #[arg(long)]
    pub mapping: Option<String>,
    /// Override: white-box hidden-layer index (1-based).
    #[arg(long)]
    pub map_layer: Option<usize>,
    /// Override: white-box unit fraction.
    #[arg(long)]
    pub unit_fraction: Option<f64>,
    /// Override: encoded member fraction.
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Override: member-selection seed.
    #[arg(long)]
    pub select_seed: Option<u64>,
    /// Override: training epochs (T).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Override: batch size (b).
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Override: discriminator steps per iteration (k).
    #[arg(long)]
    pub disc_steps: Option<usize>,
    /// Override: classifier learning rate.
    #[arg(long)]
    pub lr_model: Option<f64>,
    /// Override: encoding-step learning rate.
    #[arg(long)]
    pub lr_disc: Option<f64>,
    /// Override: momentum coefficient.
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Override: comma-separated 1-based decay epochs.
    #[arg(long)]
    pub decay_epochs: Option<String>,
    /// Override: training shuffle seed.
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
    /// Override: decoder seed.
    #[arg(long)]
    pub decoder_seed: Option<u64>,
}

impl ConfigArgs {
    pub fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config)
            .with_context(|| format!("loading config {}", self.config.display()))?;

        if let (Some(train), Some(test)) = (&self.train_csv, &self.test_csv) {
            cfg.dataset = memenc::config::DatasetConfig::Csv {
                train: train.clone(),
                test: test.clone(),
                label_column: Default::default(),
                delimiter: ',',
                has_header: true,
                classes: None,
            };
        }
        if let Some(arch) = &self.arch {
            cfg.model.hidden = parse_arch(arch)?;
        }
        if let Some(v) = self.init_seed {
            cfg.model.init_seed = v;
        }
        if let Some(v) = self.key_seed {
            cfg.key.seed = v;
        }
        if let Some(v) = self.key_n {
            cfg.key.n = v;
        }
        if let Some(v) = self.alpha {
            cfg.key.alpha = v;
        }
        if let Some(v) = self.beta {
            cfg.key.beta = v;
        }
        match self.mapping.as_deref() {
            None => {}
            Some("blackbox") => cfg.key.mapping = MappingConfig::Blackbox,
            Some("whitebox") => {
                let (layer, unit_fraction) = match cfg.key.mapping {
                    MappingConfig::Whitebox {
                        layer,
                        unit_fraction,
                    } => (layer, unit_fraction),
                    MappingConfig::Blackbox => (1, 0.5),
                };
                cfg.key.mapping = MappingConfig::Whitebox {
                    layer,
                    unit_fraction,
                };
            }
            Some(other) => anyhow::bail!("unknown mapping mode '{other}'"),
        }
        if let Some(l) = self.map_layer {
            match &mut cfg.key.mapping {
                MappingConfig::Whitebox { layer, .. } => *layer = l,
                MappingConfig::Blackbox => anyhow::bail!("--map-layer needs whitebox mapping"),
            }
        }
        if let Some(f) = self.unit_fraction {
            match &mut cfg.key.mapping {
                MappingConfig::Whitebox { unit_fraction, .. } => *unit_fraction = f,
                MappingConfig::Blackbox => {
                    anyhow::bail!("--unit-fraction needs whitebox mapping")
                }
            }
        }
        if let Some(f) = self.fraction {
            match &mut cfg.selection {
                SelectionConfig::Random { fraction, .. } => *fraction = f,
                SelectionConfig::Label { .. } => {
                    anyhow::bail!("--fraction applies to random selection only")
                }
            }
        }
        if let Some(s) = self.select_seed {
            match &mut cfg.selection {
                SelectionConfig::Random { seed, .. } => *seed = s,
                SelectionConfig::Label { .. } => {
                    anyhow::bail!("--select-seed applies to random selection only")
                }
            }
        }
        if let Some(v) = self.epochs {
            cfg.training.epochs = v;
        }
        if let Some(v) = self.batch_size {
            cfg.training.batch_size = v;
        }
        if let Some(v) = self.disc_steps {
            cfg.training.disc_steps = v;
        }
        if let Some(v) = self.lr_model {
            cfg.training.lr_model = v;
        }
        if let Some(v) = self.lr_disc {
            cfg.training.lr_disc = v;
        }
        if let Some(v) = self.momentum {
            cfg.training.momentum = v;
        }
        if let Some(spec) = &self.decay_epochs {
            cfg.training.decay_epochs = spec
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .context("parsing --decay-epochs")?;
        }
        if let Some(v) = self.shuffle_seed {
            cfg.training.shuffle_seed = v;
        }
        if let Some(v) = self.decoder_seed {
            cfg.decoder.seed = v;
        }
        Ok(cfg)
    }
}

/// A config resolved against its dataset.
pub struct Context {
    pub cfg: RunConfig,
    pub split: SplitDataset,
    pub key: EncodingKey,
    pub geometry: Option<ImageGeometry>,
}

pub fn resolve(cfg: RunConfig) -> Result<Context> {
    let (train, test, geometry) = cfg.load_dataset()?;
    let split = cfg.split(&train, test)?;
    let key = cfg.key.build(train.dim());
    Ok(Context {
        cfg,
        split,
        key,
        geometry,
    })
}

/// Load a records CSV in dataset format (labels present but often unused).
pub fn load_records(path: &Path, classes: usize) -> Result<LabeledDataset> {
    Ok(memenc::data::load_csv_dataset(
        path,
        &Default::default(),
        b',',
        true,
        Some(classes),
    )?)
}
