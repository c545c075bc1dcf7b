use crate::error::{Error, Result};

/// Floor applied inside every logarithm to keep losses finite.
pub const LOG_EPS: f64 = 1e-12;

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Cross-entropy `-log(probs[class])` with the `LOG_EPS` floor.
pub fn cross_entropy(probs: &[f64], class: usize) -> Result<f64> {
    if class >= probs.len() {
        return Err(Error::ClassOutOfRange {
            index: class,
            classes: probs.len(),
        });
    }
    Ok(-probs[class].max(LOG_EPS).ln())
}

/// Component-wise `log(max(p, LOG_EPS))` of a probability vector. This is
/// the black-box representation read by the membership discriminator.
pub fn log_probs(probs: &[f64]) -> Vec<f64> {
    probs.iter().map(|&p| p.max(LOG_EPS).ln()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_probs_cost_log_c() {
        let probs = vec![0.1; 10];
        let loss = cross_entropy(&probs, 3).unwrap();
        assert!((loss - 2.302585092994046).abs() < 1e-12);
    }

    #[test]
    fn one_hot_costs_zero() {
        let mut probs = vec![0.0; 5];
        probs[2] = 1.0;
        assert_eq!(cross_entropy(&probs, 2).unwrap(), 0.0);
    }

    #[test]
    fn hand_evaluated_case() {
        let loss = cross_entropy(&[0.7, 0.2, 0.1], 1).unwrap();
        assert!((loss - 1.6094379124341003).abs() < 1e-12);
    }

    #[test]
    fn class_out_of_range_is_error() {
        assert!(cross_entropy(&[0.5, 0.5], 2).is_err());
    }

    #[test]
    fn zero_prob_is_floored_not_infinite() {
        let loss = cross_entropy(&[1.0, 0.0], 1).unwrap();
        assert!(loss.is_finite());
        assert!((loss - (-LOG_EPS.ln())).abs() < 1e-9);
    }

    #[test]
    fn softmax_sums_to_one_for_random_logits() {
        let mut rng = crate::rng::Rng::new(11);
        for _ in 0..1000 {
            let n = 2 + rng.index(20);
            let logits: Vec<f64> = (0..n).map(|_| rng.uniform_range(-50.0, 50.0)).collect();
            let p = softmax(&logits);
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
            assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
