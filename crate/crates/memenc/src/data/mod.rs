//! Dataset ingestion and generation.

mod benchmark;
mod csv;
mod dataset;
mod idx;

pub use benchmark::gen_benchmark;
pub use csv::{load_csv_dataset, save_csv_dataset, LabelColumn};
pub use dataset::LabeledDataset;
pub use idx::{load_idx_images, parse_idx};
