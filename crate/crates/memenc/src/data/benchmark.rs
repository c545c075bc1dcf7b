//! Seeded Gaussian-blob benchmark generator.
//!
//! A desk-scale stand-in for large tabular datasets: `c` unit-covariance
//! blobs with seeded means, labeled by blob, split 5:1 into train and test.
//! Means are drawn uniformly in the unit cube, centered on their centroid,
//! and rescaled so the minimum pairwise distance equals `separation`. That
//! pins the difficulty of the classification task independent of seed,
//! class count, and dimension, and keeps the data centered the way
//! normalized ML inputs are.

use crate::data::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng::Rng;

pub fn gen_benchmark(
    seed: u64,
    classes: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if classes == 0 || per_class == 0 || dim == 0 {
        return Err(Error::invalid("benchmark counts must be >= 1"));
    }
    if separation <= 0.0 {
        return Err(Error::invalid("separation must be positive"));
    }
    let mut rng = Rng::new(seed);

    let mut means: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| rng.uniform()).collect())
        .collect();
    let centroid: Vec<f64> = (0..dim)
        .map(|j| means.iter().map(|m| m[j]).sum::<f64>() / classes as f64)
        .collect();
    for mean in &mut means {
        for (v, c) in mean.iter_mut().zip(&centroid) {
            *v -= c;
        }
    }
    if classes >= 2 {
        let mut min_dist = f64::INFINITY;
        for a in 0..classes {
            for b in a + 1..classes {
                let d: f64 = means[a]
                    .iter()
                    .zip(&means[b])
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                min_dist = min_dist.min(d);
            }
        }
        let scale = separation / min_dist;
        for mean in &mut means {
            for v in mean.iter_mut() {
                *v *= scale;
            }
        }
    }

    let train_per_class = (per_class * 5) / 6;
    let mut train_x = Vec::new();
    let mut train_y = Vec::new();
    let mut test_x = Vec::new();
    let mut test_y = Vec::new();
    for (label, mean) in means.iter().enumerate() {
        for i in 0..per_class {
            let point: Vec<f64> = mean.iter().map(|&m| m + rng.normal()).collect();
            if i < train_per_class {
                train_x.push(point);
                train_y.push(label);
            } else {
                test_x.push(point);
                test_y.push(label);
            }
        }
    }

    Ok((
        LabeledDataset::new(train_x, train_y, classes)?,
        LabeledDataset::new(test_x, test_y, classes)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_identical_datasets() {
        let a = gen_benchmark(3, 4, 30, 8, 5.0).unwrap();
        let b = gen_benchmark(3, 4, 30, 8, 5.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_counts() {
        let (train, test) = gen_benchmark(1, 10, 600, 16, 6.0).unwrap();
        assert_eq!(train.len(), 5000);
        assert_eq!(test.len(), 1000);
        assert_eq!(train.classes(), 10);
        assert_eq!(train.dim(), 16);
    }

    #[test]
    fn wide_separation_is_linearly_classifiable() {
        // separation 10 sigma: nearest-mean classification is essentially
        // error-free.
        let (train, _) = gen_benchmark(5, 2, 120, 12, 10.0).unwrap();
        let mut means = vec![vec![0.0; 12]; 2];
        let mut counts = [0usize; 2];
        for (x, y) in train.iter() {
            counts[y] += 1;
            for (m, v) in means[y].iter_mut().zip(x) {
                *m += v;
            }
        }
        for (mean, &cnt) in means.iter_mut().zip(&counts) {
            for v in mean.iter_mut() {
                *v /= cnt as f64;
            }
        }
        let mut correct = 0;
        for (x, y) in train.iter() {
            let d0: f64 = x.iter().zip(&means[0]).map(|(a, b)| (a - b) * (a - b)).sum();
            let d1: f64 = x.iter().zip(&means[1]).map(|(a, b)| (a - b) * (a - b)).sum();
            let pred = usize::from(d1 < d0);
            if pred == y {
                correct += 1;
            }
        }
        assert!(
            correct as f64 >= 0.999 * train.len() as f64,
            "{correct}/{}",
            train.len()
        );
    }
}
