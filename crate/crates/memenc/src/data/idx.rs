//! IDX image/label ingestion (the MNIST distribution format).
//!
//! Big-endian magic numbers and dimensions; pixel bytes are scaled to
//! `[0, 1]` and images flattened row-major.

use std::path::Path;

use crate::data::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::robustness::ImageGeometry;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_u32_be(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
        .ok_or_else(|| Error::Format(format!("{what}: file truncated")))
}

/// Load an IDX image file plus its label file into a flattened dataset.
/// Image and label counts must match.
pub fn load_idx_images(images_path: &Path, labels_path: &Path) -> Result<(LabeledDataset, ImageGeometry)> {
    let images = std::fs::read(images_path)?;
    let labels = std::fs::read(labels_path)?;
    parse_idx(&images, &labels)
}

pub fn parse_idx(images: &[u8], labels: &[u8]) -> Result<(LabeledDataset, ImageGeometry)> {
    let magic = read_u32_be(images, 0, "images")?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "images: bad magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"
        )));
    }
    let count = read_u32_be(images, 4, "images")? as usize;
    let rows = read_u32_be(images, 8, "images")? as usize;
    let cols = read_u32_be(images, 12, "images")? as usize;
    let pixels = rows * cols;
    let expect = 16 + count * pixels;
    if images.len() < expect {
        return Err(Error::Format(format!(
            "images: expected {expect} bytes for {count} images of {rows}x{cols}, got {}",
            images.len()
        )));
    }

    let lmagic = read_u32_be(labels, 0, "labels")?;
    if lmagic != LABELS_MAGIC {
        return Err(Error::Format(format!(
            "labels: bad magic {lmagic:#010x}, expected {LABELS_MAGIC:#010x}"
        )));
    }
    let lcount = read_u32_be(labels, 4, "labels")? as usize;
    if lcount != count {
        return Err(Error::Format(format!(
            "count mismatch: {count} images but {lcount} labels"
        )));
    }
    if labels.len() < 8 + lcount {
        return Err(Error::Format("labels: file truncated".into()));
    }

    let features: Vec<Vec<f64>> = (0..count)
        .map(|i| {
            images[16 + i * pixels..16 + (i + 1) * pixels]
                .iter()
                .map(|&b| b as f64 / 255.0)
                .collect()
        })
        .collect();
    let label_values: Vec<usize> = labels[8..8 + count].iter().map(|&b| b as usize).collect();
    let classes = label_values.iter().copied().max().unwrap_or(0) + 1;
    Ok((
        LabeledDataset::new(features, label_values, classes)?,
        ImageGeometry::new(rows, cols, 1),
    ))
}
