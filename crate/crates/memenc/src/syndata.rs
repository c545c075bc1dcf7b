//! Keyed generation of the auxiliary synthetic datasets.
//!
//! Two Gaussian mixtures anchor the membership discriminator: one encoded
//! as member, one as nonmember. Their means come from a uniform draw and the
//! points from unit-covariance normals, all on a dedicated sub-stream of the
//! key seed, so the decoder regenerates the exact same bits from the key
//! alone. The points are deliberately not clipped to the client data's
//! feature range: they only ever reach the model through the encoding loss,
//! never the classification loss.

use crate::error::Result;
use crate::key::EncodingKey;
use crate::rng::{Rng, STREAM_SYNTH};

/// The two synthetic mixtures and their means.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub members: Vec<Vec<f64>>,
    pub nonmembers: Vec<Vec<f64>>,
    pub mean_member: Vec<f64>,
    pub mean_nonmember: Vec<f64>,
}

/// Deterministic function of the key. Draw order is fixed forever:
/// member mean, nonmember mean, `n` member points, `n` nonmember points,
/// each vector coordinate by coordinate.
pub fn gen_synthetic_data(key: &EncodingKey) -> Result<SyntheticPair> {
    key.validate()?;
    let mut rng = Rng::with_stream(key.seed, STREAM_SYNTH);
    let (n, q) = (key.n, key.q);

    let mean_member: Vec<f64> = (0..q).map(|_| rng.uniform_range(key.alpha, key.beta)).collect();
    let mean_nonmember: Vec<f64> =
        (0..q).map(|_| rng.uniform_range(key.alpha, key.beta)).collect();

    let mut draw_cluster = |mean: &[f64]| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| mean.iter().map(|&m| m + rng.normal()).collect())
            .collect()
    };
    let members = draw_cluster(&mean_member);
    let nonmembers = draw_cluster(&mean_nonmember);

    Ok(SyntheticPair {
        members,
        nonmembers,
        mean_member,
        mean_nonmember,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::MappingConfig;

    fn key(seed: u64, n: usize, q: usize) -> EncodingKey {
        EncodingKey {
            seed,
            n,
            q,
            alpha: 0.0,
            beta: 1.0,
            mapping: MappingConfig::Blackbox,
        }
    }

    #[test]
    fn same_key_bit_identical() {
        let k = key(1234, 100, 32);
        let a = gen_synthetic_data(&k).unwrap();
        let b = gen_synthetic_data(&k).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_means_concentrate_on_mixture_means() {
        // 1,000-point setup: n=500 per mixture, q=600. The per-coordinate
        // sample mean is within 4/sqrt(500) of the true mean except with
        // probability ~6e-5, so at least 99% of 600 coordinates qualify.
        let k = key(77, 500, 600);
        let pair = gen_synthetic_data(&k).unwrap();
        let bound = 4.0 / (500f64).sqrt();
        let mut ok = 0;
        for j in 0..600 {
            let mean: f64 = pair.members.iter().map(|x| x[j]).sum::<f64>() / 500.0;
            if (mean - pair.mean_member[j]).abs() <= bound {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.99 * 600.0, "only {ok}/600 coordinates in bound");
    }

    #[test]
    fn different_seeds_give_different_means() {
        let mut rng = Rng::new(555);
        for _ in 0..100 {
            let s1 = rng.next_u64();
            let s2 = rng.next_u64();
            if s1 == s2 {
                continue;
            }
            let a = gen_synthetic_data(&key(s1, 1, 16)).unwrap();
            let b = gen_synthetic_data(&key(s2, 1, 16)).unwrap();
            assert_ne!(a.mean_member, b.mean_member);
        }
    }

    #[test]
    fn mixture_covariance_close_to_identity() {
        let k = key(9, 500, 64);
        let pair = gen_synthetic_data(&k).unwrap();
        let n = 500;
        let q = 64;
        let means: Vec<f64> = (0..q)
            .map(|j| pair.members.iter().map(|x| x[j]).sum::<f64>() / n as f64)
            .collect();
        let sds: Vec<f64> = (0..q)
            .map(|j| {
                (pair.members.iter().map(|x| (x[j] - means[j]).powi(2)).sum::<f64>()
                    / n as f64)
                    .sqrt()
            })
            .collect();
        for a in 0..q {
            for b in a + 1..q {
                let cov: f64 = pair
                    .members
                    .iter()
                    .map(|x| (x[a] - means[a]) * (x[b] - means[b]))
                    .sum::<f64>()
                    / n as f64;
                let corr = cov / (sds[a] * sds[b]);
                assert!(corr.abs() < 0.2, "corr[{a},{b}] = {corr}");
            }
        }
    }

    #[test]
    fn clusters_linearly_separable_at_high_dimension() {
        // Train a logistic separator (single softmax layer) on the 1,000
        // points; at q=600 the mixtures sit ~10 sigma apart.
        use crate::nn::{backprop, LossHead, Activation, MlpModel, OptimizerState};

        let k = key(31, 500, 600);
        let pair = gen_synthetic_data(&k).unwrap();
        let mut model = MlpModel::feedforward(600, &[], 2, Activation::Identity, 3).unwrap();
        let mut opt = OptimizerState::new(&model, 0.1, 0.9).unwrap();
        for _ in 0..30 {
            let batch: Vec<(&[f64], LossHead)> = pair
                .members
                .iter()
                .map(|x| (x.as_slice(), LossHead::CrossEntropy { class: 1 }))
                .chain(
                    pair.nonmembers
                        .iter()
                        .map(|x| (x.as_slice(), LossHead::CrossEntropy { class: 0 })),
                )
                .collect();
            let g = backprop(&model, &batch).unwrap();
            opt.sgd_step(&mut model, &g).unwrap();
        }
        let mut correct = 0;
        for x in &pair.members {
            if model.predict(x).unwrap() == 1 {
                correct += 1;
            }
        }
        for x in &pair.nonmembers {
            if model.predict(x).unwrap() == 0 {
                correct += 1;
            }
        }
        assert!(correct >= 990, "separator got {correct}/1000");
    }
}
