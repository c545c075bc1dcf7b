//! Declarative run configuration. One JSON file pins every input of an
//! experiment — dataset source, architecture, key, selection, training
//! schedule, decoder schedule — with all randomness behind explicit named
//! seeds, so a run is bit-reproducible end to end.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{gen_benchmark, load_csv_dataset, load_idx_images, LabelColumn, LabeledDataset};
use crate::decoder::InferenceConfig;
use crate::encoder::{select_members, EncodingConfig, Selection, SplitDataset};
use crate::error::{Error, Result};
use crate::key::{EncodingKey, MappingConfig};
use crate::nn::{Activation, MlpModel};
use crate::robustness::ImageGeometry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    pub key: KeyConfig,
    pub selection: SelectionConfig,
    pub training: EncodingConfig,
    #[serde(default)]
    pub decoder: DecoderConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetConfig {
    /// Seeded Gaussian-blob benchmark.
    Benchmark {
        seed: u64,
        classes: usize,
        per_class: usize,
        dim: usize,
        separation: f64,
    },
    /// CSV train/test pair.
    Csv {
        train: PathBuf,
        test: PathBuf,
        #[serde(default)]
        label_column: LabelColumn,
        #[serde(default = "default_delimiter")]
        delimiter: char,
        #[serde(default = "default_true")]
        has_header: bool,
        #[serde(default)]
        classes: Option<usize>,
    },
    /// IDX image/label files (MNIST layout).
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
}

fn default_delimiter() -> char {
    ','
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Hidden-layer widths, e.g. `[128, 64]`.
    pub hidden: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    pub init_seed: u64,
}

fn default_activation() -> Activation {
    Activation::Relu
}

impl ModelConfig {
    pub fn build(&self, input_dim: usize, classes: usize) -> Result<MlpModel> {
        MlpModel::feedforward(input_dim, &self.hidden, classes, self.activation, self.init_seed)
    }
}

/// Parse an architecture string like `mlp:128,64` into hidden widths.
pub fn parse_arch(s: &str) -> Result<Vec<usize>> {
    let body = s
        .strip_prefix("mlp:")
        .ok_or_else(|| Error::invalid(format!("architecture '{s}' must look like 'mlp:128,64'")))?;
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad layer width '{part}' in '{s}'")))
        })
        .collect()
}

/// The key without `q`, which always comes from the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyConfig {
    pub seed: u64,
    pub n: usize,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub mapping: MappingConfig,
}

fn default_beta() -> f64 {
    1.0
}

impl KeyConfig {
    pub fn build(&self, q: usize) -> EncodingKey {
        EncodingKey {
            seed: self.seed,
            n: self.n,
            q,
            alpha: self.alpha,
            beta: self.beta,
            mapping: self.mapping,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum SelectionConfig {
    /// Seeded random fraction.
    Random { fraction: f64, seed: u64 },
    /// Every record with this class label (the sensitive-criteria path).
    Label { label: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub inference: InferenceConfig,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            inference: InferenceConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Format(format!("run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Load or generate the train/test pair. Image-shaped sources also
    /// return their geometry.
    pub fn load_dataset(&self) -> Result<(LabeledDataset, LabeledDataset, Option<ImageGeometry>)> {
        match &self.dataset {
            DatasetConfig::Benchmark {
                seed,
                classes,
                per_class,
                dim,
                separation,
            } => {
                let (train, test) = gen_benchmark(*seed, *classes, *per_class, *dim, *separation)?;
                Ok((train, test, None))
            }
            DatasetConfig::Csv {
                train,
                test,
                label_column,
                delimiter,
                has_header,
                classes,
            } => {
                let delim = *delimiter as u8;
                let train_set =
                    load_csv_dataset(train, label_column, delim, *has_header, *classes)?;
                let classes = Some(classes.unwrap_or(0).max(train_set.classes()));
                let test_set = load_csv_dataset(test, label_column, delim, *has_header, classes)?;
                Ok((train_set, test_set, None))
            }
            DatasetConfig::Idx {
                train_images,
                train_labels,
                test_images,
                test_labels,
            } => {
                let (train, geom) = load_idx_images(train_images, train_labels)?;
                let (test, geom2) = load_idx_images(test_images, test_labels)?;
                if geom != geom2 {
                    return Err(Error::Format(
                        "train and test images have different geometry".into(),
                    ));
                }
                Ok((train, test, Some(geom)))
            }
        }
    }

    /// Partition the training data per the configured selection.
    pub fn split(&self, train: &LabeledDataset, test: LabeledDataset) -> Result<SplitDataset> {
        match &self.selection {
            SelectionConfig::Random { fraction, seed } => select_members(
                train,
                test,
                Selection::Random {
                    fraction: *fraction,
                    seed: *seed,
                },
            ),
            SelectionConfig::Label { label } => {
                let wanted = *label;
                select_members(train, test, Selection::Predicate(&move |_, y| y == wanted))
            }
        }
    }
}
