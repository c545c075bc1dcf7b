use crate::error::{Error, Result};

/// Labeled records: feature vectors of a common dimension plus class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    classes: usize,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if classes == 0 {
            return Err(Error::invalid("class count must be >= 1"));
        }
        if let Some(first) = features.first() {
            let q = first.len();
            if q == 0 {
                return Err(Error::invalid("feature dimension must be >= 1"));
            }
            for (i, row) in features.iter().enumerate() {
                if row.len() != q {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("row has {} features, expected {q}", row.len()),
                    });
                }
            }
        }
        if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= classes) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("label {y} out of range for {classes} classes"),
            });
        }
        Ok(Self {
            features,
            labels,
            classes,
        })
    }

    /// An empty dataset with the given shape (used when a selection leaves
    /// one side of a partition empty).
    pub fn empty(classes: usize) -> Self {
        Self {
            features: Vec::new(),
            labels: Vec::new(),
            classes,
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Feature dimension; 0 for an empty dataset.
    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, |r| r.len())
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn feature(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], usize)> {
        self.features
            .iter()
            .map(|f| f.as_slice())
            .zip(self.labels.iter().copied())
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// New dataset holding the given rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }
}
