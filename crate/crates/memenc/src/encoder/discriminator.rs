//! The encoding-phase membership discriminator: a single linear unit with a
//! sigmoid read-out over the mapped representation.

use crate::error::{Error, Result};
use crate::nn::LOG_EPS;
use crate::rng::Rng;

/// Clamp keeping probabilities strictly inside (0, 1) so the encoding loss
/// stays finite.
fn clamp_prob(p: f64) -> f64 {
    p.clamp(LOG_EPS, 1.0 - LOG_EPS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Discriminator {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self::with_rng(dim, &mut Rng::new(seed))
    }

    pub fn with_rng(dim: usize, rng: &mut Rng) -> Self {
        let limit = (6.0 / (dim + 1) as f64).sqrt();
        Self {
            weights: (0..dim).map(|_| rng.uniform_range(-limit, limit)).collect(),
            bias: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Membership probability for a mapped representation.
    pub fn prob(&self, h: &[f64]) -> f64 {
        debug_assert_eq!(h.len(), self.weights.len());
        let u: f64 = self
            .weights
            .iter()
            .zip(h)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias;
        clamp_prob(1.0 / (1.0 + (-u).exp()))
    }
}

/// Mean binary cross-entropy of membership predictions against bits `z`.
/// This is the loss both players descend during encoding.
pub fn encoding_loss(dhat: &[f64], z: &[bool]) -> Result<f64> {
    if dhat.len() != z.len() {
        return Err(Error::Shape {
            expected: z.len(),
            got: dhat.len(),
        });
    }
    if dhat.is_empty() {
        return Err(Error::Empty("encoding loss batch"));
    }
    let total: f64 = dhat
        .iter()
        .zip(z)
        .map(|(&p, &zi)| {
            let p = clamp_prob(p);
            if zi {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(total / dhat.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_cost_nothing() {
        let loss = encoding_loss(&[1.0, 0.0, 1.0], &[true, false, true]).unwrap();
        assert!(loss.abs() < 1e-10, "loss {loss}");
    }

    #[test]
    fn maximal_uncertainty_costs_ln2() {
        let loss = encoding_loss(&[0.5; 4], &[true, false, true, false]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn hand_evaluated_case() {
        let loss = encoding_loss(&[0.9, 0.2], &[true, false]).unwrap();
        let expect = -(0.9f64.ln() + 0.8f64.ln()) / 2.0;
        assert!((loss - expect).abs() < 1e-12);
        assert!((loss - 0.16425203348601798).abs() < 1e-9);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(encoding_loss(&[0.5], &[true, false]).is_err());
    }

    #[test]
    fn probability_strictly_inside_unit_interval() {
        let d = Discriminator {
            weights: vec![1000.0],
            bias: 0.0,
        };
        let hi = d.prob(&[1000.0]);
        let lo = d.prob(&[-1000.0]);
        assert!(hi < 1.0 && hi > 0.0);
        assert!(lo > 0.0 && lo < 1.0);
    }

    #[test]
    fn seeded_init_reproducible() {
        assert_eq!(Discriminator::new(8, 3), Discriminator::new(8, 3));
    }
}
