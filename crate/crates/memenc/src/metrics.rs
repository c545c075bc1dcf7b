//! Evaluation metrics: precision/recall at a threshold, exact rank AUC,
//! test accuracy, and a two-component PCA for representation plots.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::nn::MlpModel;
use crate::rng::Rng;

/// Membership scores with ground-truth bits. By convention the positives
/// are the encoded members and the negatives come from the hold-out test
/// set.
#[derive(Debug, Clone)]
pub struct ScoreSet {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl ScoreSet {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::Shape {
                expected: labels.len(),
                got: scores.len(),
            });
        }
        if scores.is_empty() {
            return Err(Error::Empty("score set"));
        }
        if !labels.iter().any(|&l| l) || !labels.iter().any(|&l| !l) {
            return Err(Error::invalid(
                "score set needs at least one positive and one negative",
            ));
        }
        Ok(Self { scores, labels })
    }

    /// Positives scored first, negatives second.
    pub fn from_pools(positives: &[f64], negatives: &[f64]) -> Result<Self> {
        let scores: Vec<f64> = positives.iter().chain(negatives).copied().collect();
        let labels: Vec<bool> = std::iter::repeat(true)
            .take(positives.len())
            .chain(std::iter::repeat(false).take(negatives.len()))
            .collect();
        Self::new(scores, labels)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }
}

/// Precision and recall of the decision `score >= threshold`.
///
/// When nothing is predicted positive, precision is 1.0 by convention (the
/// degenerate case of a perfectly conservative detector).
pub fn precision_recall(s: &ScoreSet, threshold: f64) -> (f64, f64) {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&score, &label) in s.scores.iter().zip(&s.labels) {
        let predicted = score >= threshold;
        match (predicted, label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = tp as f64 / (tp + fn_) as f64;
    (precision, recall)
}

/// Rank AUC: the probability that a random positive outscores a random
/// negative, ties counted half. Computed exactly via midranks, which equals
/// the brute-force pairwise count.
pub fn auc(s: &ScoreSet) -> f64 {
    let n = s.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| s.scores[a].partial_cmp(&s.scores[b]).expect("finite scores"));

    let mut rank = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && s.scores[idx[j + 1]] == s.scores[idx[i]] {
            j += 1;
        }
        // Ranks are 1-based; tied scores share the midrank.
        let mid = (i + 1 + j + 1) as f64 / 2.0;
        for k in i..=j {
            rank[idx[k]] = mid;
        }
        i = j + 1;
    }

    let positives = s.labels.iter().filter(|&&l| l).count() as f64;
    let negatives = n as f64 - positives;
    let rank_sum: f64 = (0..n).filter(|&k| s.labels[k]).map(|k| rank[k]).sum();
    (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives)
}

/// Fraction of records whose argmax prediction matches the label; argmax
/// ties break toward the lowest class index.
pub fn test_accuracy(model: &MlpModel, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("accuracy dataset"));
    }
    let mut correct = 0usize;
    for (x, y) in data.iter() {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

const PCA_ITERATIONS: usize = 1000;
const PCA_TOLERANCE: f64 = 1e-10;

/// Project mean-centered vectors onto their top two principal components
/// (power iteration with deflation). Component signs are fixed so the
/// largest-magnitude loading is positive.
pub fn pca2(vectors: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
    if vectors.len() < 3 {
        return Err(Error::invalid("pca2 needs at least 3 vectors"));
    }
    let d = vectors[0].len();
    if d < 2 {
        return Err(Error::invalid("pca2 needs dimension >= 2"));
    }
    if vectors.iter().any(|v| v.len() != d) {
        return Err(Error::invalid("pca2 vectors must share a dimension"));
    }

    let n = vectors.len();
    let mean: Vec<f64> = (0..d)
        .map(|j| vectors.iter().map(|v| v[j]).sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let mut cov = vec![0.0f64; d * d];
    for row in &centered {
        for a in 0..d {
            for b in a..d {
                cov[a * d + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov[a * d + b] / n as f64;
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }
    }
    let total_var: f64 = (0..d).map(|a| cov[a * d + a]).sum();
    if total_var <= 0.0 {
        return Err(Error::invalid("pca2: degenerate input (no variance)"));
    }

    let (v1, l1) = dominant_eigenvector(&cov, d, None)?;
    // Deflate and find the second component; if the residual is rank-zero
    // (e.g. perfectly collinear data), fall back to any unit vector
    // orthogonal to the first.
    for a in 0..d {
        for b in 0..d {
            cov[a * d + b] -= l1 * v1[a] * v1[b];
        }
    }
    let v2 = match dominant_eigenvector(&cov, d, Some(&v1)) {
        Ok((v, _)) => v,
        Err(_) => orthogonal_unit(&v1),
    };

    Ok(centered
        .iter()
        .map(|row| {
            [
                row.iter().zip(&v1).map(|(x, v)| x * v).sum(),
                row.iter().zip(&v2).map(|(x, v)| x * v).sum(),
            ]
        })
        .collect())
}

fn dominant_eigenvector(
    cov: &[f64],
    d: usize,
    orthogonal_to: Option<&[f64]>,
) -> Result<(Vec<f64>, f64)> {
    let mut rng = Rng::new(0x50434132); // fixed start vector, "PCA2"
    let mut v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
    if let Some(prev) = orthogonal_to {
        project_out(&mut v, prev);
    }
    normalize(&mut v)?;
    let mut prev_dot = 0.0f64;
    for _ in 0..PCA_ITERATIONS {
        let mut next = vec![0.0; d];
        for a in 0..d {
            next[a] = cov[a * d..(a + 1) * d]
                .iter()
                .zip(&v)
                .map(|(c, x)| c * x)
                .sum();
        }
        if let Some(prev) = orthogonal_to {
            project_out(&mut next, prev);
        }
        normalize(&mut next)?;
        let dot: f64 = next.iter().zip(&v).map(|(a, b)| a * b).sum();
        v = next;
        if (dot.abs() - 1.0).abs() < PCA_TOLERANCE && (prev_dot.abs() - 1.0).abs() < PCA_TOLERANCE
        {
            break;
        }
        prev_dot = dot;
    }
    let mut cv = vec![0.0; d];
    for a in 0..d {
        cv[a] = cov[a * d..(a + 1) * d]
            .iter()
            .zip(&v)
            .map(|(c, x)| c * x)
            .sum();
    }
    let lambda: f64 = cv.iter().zip(&v).map(|(a, b)| a * b).sum();
    fix_sign(&mut v);
    Ok((v, lambda))
}

fn project_out(v: &mut [f64], basis: &[f64]) {
    let dot: f64 = v.iter().zip(basis).map(|(a, b)| a * b).sum();
    for (x, b) in v.iter_mut().zip(basis) {
        *x -= dot * b;
    }
}

fn normalize(v: &mut [f64]) -> Result<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-200 {
        return Err(Error::invalid("pca2: zero vector during iteration"));
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    Ok(())
}

fn fix_sign(v: &mut [f64]) {
    let mut biggest = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[biggest].abs() {
            biggest = i;
        }
    }
    if v[biggest] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

fn orthogonal_unit(v1: &[f64]) -> Vec<f64> {
    let d = v1.len();
    let mut smallest = 0usize;
    for (i, x) in v1.iter().enumerate() {
        if x.abs() < v1[smallest].abs() {
            smallest = i;
        }
    }
    let mut v = vec![0.0; d];
    v[smallest] = 1.0;
    project_out(&mut v, v1);
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    fix_sign(&mut v);
    v
}
