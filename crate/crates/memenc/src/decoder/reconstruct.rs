//! Reconstruction attack: among candidate completions of a partially known
//! record, the one scored most confidently as member is the reconstruction.

use crate::decoder::infer::{membership_scores, InferenceDiscriminator};
use crate::decoder::oracle::ModelOracle;
use crate::error::{Error, Result};

/// Score every candidate and return the argmax index (ties break to the
/// lowest index) along with all scores.
pub fn reconstruct_record(
    d: &InferenceDiscriminator,
    oracle: &dyn ModelOracle,
    candidates: &[Vec<f64>],
) -> Result<(usize, Vec<f64>)> {
    if candidates.is_empty() {
        return Err(Error::Empty("candidate set"));
    }
    let scores = membership_scores(d, oracle, candidates)?;
    let mut best = 0usize;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    Ok((best, scores))
}
