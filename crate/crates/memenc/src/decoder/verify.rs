//! Watermark verification: score the claimed records, require both a
//! detected fraction above a threshold and statistical significance against
//! the chance null.

use serde::{Deserialize, Serialize};

use crate::decoder::infer::{membership_scores, InferenceDiscriminator};
use crate::decoder::oracle::ModelOracle;
use crate::error::{Error, Result};

pub const DEFAULT_TAU: f64 = 0.7;
pub const DEFAULT_SIGNIFICANCE: f64 = 1e-6;

/// Outcome of a verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WatermarkVerdict {
    pub scores: Vec<f64>,
    /// Records with score >= 0.5.
    pub detected: usize,
    pub claimed: usize,
    pub fraction: f64,
    pub tau: f64,
    /// One-sided binomial tail P(X >= detected) under chance (p = 1/2).
    pub p_value: f64,
    pub significance: f64,
    pub accept: bool,
}

/// Score every claimed record; accept iff the detected fraction reaches
/// `tau` AND the one-sided binomial test against chance is significant.
pub fn verify_watermark(
    d: &InferenceDiscriminator,
    oracle: &dyn ModelOracle,
    claimed: &[Vec<f64>],
    tau: f64,
    significance: f64,
) -> Result<WatermarkVerdict> {
    if claimed.is_empty() {
        return Err(Error::Empty("claimed record set"));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::invalid("tau must be in [0, 1]"));
    }
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::invalid("significance must be in (0, 1)"));
    }
    let scores = membership_scores(d, oracle, claimed)?;
    let detected = scores.iter().filter(|&&s| s >= 0.5).count();
    let fraction = detected as f64 / claimed.len() as f64;
    let p_value = binomial_upper_tail(detected, claimed.len());
    let accept = fraction >= tau && p_value < significance;
    Ok(WatermarkVerdict {
        scores,
        detected,
        claimed: claimed.len(),
        fraction,
        tau,
        p_value,
        significance,
        accept,
    })
}

/// P(X >= k) for X ~ Binomial(n, 1/2), computed in log space so tiny tails
/// are exact instead of cancelled to zero.
pub fn binomial_upper_tail(k: usize, n: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let ln2 = std::f64::consts::LN_2;
    // Walk ln C(n, i) from i = k upward via the ratio recurrence, tracking
    // the running max for a stable log-sum-exp.
    let mut ln_c = ln_choose(n, k);
    let mut terms = Vec::with_capacity(n - k + 1);
    for i in k..=n {
        terms.push(ln_c - n as f64 * ln2);
        if i < n {
            ln_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - m).exp()).sum();
    (m + sum.ln()).exp().clamp(0.0, 1.0)
}

fn ln_choose(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 0.0;
    for j in 1..=k {
        acc += ((n - k + j) as f64).ln() - (j as f64).ln();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_tail_is_two_to_minus_n() {
        // All 100 successes: p = 2^-100 ~ 7.9e-31.
        let p = binomial_upper_tail(100, 100);
        assert!((p - 2f64.powi(-100)).abs() / 2f64.powi(-100) < 1e-9);
        assert!(p < 1e-30);
    }

    #[test]
    fn chance_detection_is_not_significant() {
        let p = binomial_upper_tail(50, 100);
        assert!(p > 0.4 && p < 0.6, "p {p}");
    }

    #[test]
    fn tail_matches_direct_summation_for_small_n() {
        // Exact rational check at n=10: P(X>=7) = (120+45+10+1)/1024.
        let p = binomial_upper_tail(7, 10);
        assert!((p - 176.0 / 1024.0).abs() < 1e-12);
        assert_eq!(binomial_upper_tail(0, 10), 1.0);
        assert!((binomial_upper_tail(1, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn adding_a_detected_record_never_raises_p() {
        for n in [10usize, 50, 200] {
            for k in 0..=n {
                let before = binomial_upper_tail(k, n);
                let after = binomial_upper_tail(k + 1, n + 1);
                assert!(
                    after <= before + 1e-15,
                    "n={n} k={k}: {after} > {before}"
                );
            }
        }
    }
}
