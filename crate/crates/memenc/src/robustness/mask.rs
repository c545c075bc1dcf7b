//! Input masking for redacted-record experiments.
//!
//! Images are flattened row-major with channels last: index
//! `(row * width + col) * channels + channel`. Masked pixels are set to 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageGeometry {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl ImageGeometry {
    pub fn new(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
        }
    }

    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum MaskMode {
    /// Zero the centered `w x w` square.
    Center { w: usize },
    /// Keep the centered `(H-w) x (W-w)` square, zero the rest.
    Boundary { w: usize },
    /// Zero the half-open pixel rectangle `[row0, row1) x [col0, col1)`.
    Rect {
        row0: usize,
        row1: usize,
        col0: usize,
        col1: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub geometry: ImageGeometry,
    pub mode: MaskMode,
}

impl MaskSpec {
    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if g.is_empty() {
            return Err(Error::invalid("empty image geometry"));
        }
        match self.mode {
            MaskMode::Center { w } | MaskMode::Boundary { w } => {
                if w > g.height.min(g.width) {
                    return Err(Error::invalid(format!(
                        "mask width {w} exceeds image size {}x{}",
                        g.height, g.width
                    )));
                }
            }
            MaskMode::Rect {
                row0,
                row1,
                col0,
                col1,
            } => {
                if row0 > row1 || col0 > col1 || row1 > g.height || col1 > g.width {
                    return Err(Error::invalid("rect mask out of image bounds"));
                }
            }
        }
        Ok(())
    }

    /// The zeroed pixel rectangle(s) as a per-pixel predicate.
    fn masked(&self, row: usize, col: usize) -> bool {
        let g = &self.geometry;
        match self.mode {
            MaskMode::Center { w } => {
                // Centered square: top-left corner at floor((H-w)/2).
                let r0 = (g.height - w) / 2;
                let c0 = (g.width - w) / 2;
                row >= r0 && row < r0 + w && col >= c0 && col < c0 + w
            }
            MaskMode::Boundary { w } => {
                let keep_h = g.height - w;
                let keep_w = g.width - w;
                let r0 = w / 2;
                let c0 = w / 2;
                !(row >= r0 && row < r0 + keep_h && col >= c0 && col < c0 + keep_w)
            }
            MaskMode::Rect {
                row0,
                row1,
                col0,
                col1,
            } => row >= row0 && row < row1 && col >= col0 && col < col1,
        }
    }
}

/// Apply the mask, returning a new flattened image.
pub fn mask_input(x: &[f64], spec: &MaskSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let g = &spec.geometry;
    if x.len() != g.len() {
        return Err(Error::Shape {
            expected: g.len(),
            got: x.len(),
        });
    }
    let mut out = x.to_vec();
    for row in 0..g.height {
        for col in 0..g.width {
            if spec.masked(row, col) {
                let base = (row * g.width + col) * g.channels;
                out[base..base + g.channels].fill(0.0);
            }
        }
    }
    Ok(out)
}
