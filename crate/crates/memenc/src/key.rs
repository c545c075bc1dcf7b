//! The shared secret between encoding and decoding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the membership representation `h` is read out of the model.
///
/// White-box: tanh of a keyed subset of one hidden layer's activations.
/// Black-box: the log of the output probability vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum MappingConfig {
    Blackbox,
    Whitebox {
        /// 1-based hidden-layer index (layer 2 of a 128/64 net is the
        /// 64-unit layer).
        layer: usize,
        /// Fraction of that layer's units selected for encoding.
        unit_fraction: f64,
    },
}

/// Everything the decoder needs besides the released model: the seed that
/// regenerates the synthetic anchors and unit mask, the synthetic-data
/// parameters, and the mapping mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingKey {
    /// Secret seed `s`.
    pub seed: u64,
    /// Synthetic points per mixture (total generated is `2n`).
    pub n: usize,
    /// Input dimension.
    pub q: usize,
    /// Lower bound of the uniform range the mixture means are drawn from.
    pub alpha: f64,
    /// Upper bound of that range.
    pub beta: f64,
    pub mapping: MappingConfig,
}

impl EncodingKey {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("key: n must be >= 1"));
        }
        if self.q == 0 {
            return Err(Error::invalid("key: q must be >= 1"));
        }
        if !(self.alpha < self.beta) {
            return Err(Error::invalid("key: alpha must be < beta"));
        }
        if let MappingConfig::Whitebox { layer, unit_fraction } = self.mapping {
            if layer == 0 {
                return Err(Error::invalid("key: whitebox layer index is 1-based"));
            }
            if !(unit_fraction > 0.0 && unit_fraction <= 1.0) {
                return Err(Error::invalid("key: unit_fraction must be in (0, 1]"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key() -> EncodingKey {
        EncodingKey {
            seed: 42,
            n: 500,
            q: 64,
            alpha: 0.0,
            beta: 1.0,
            mapping: MappingConfig::Whitebox {
                layer: 2,
                unit_fraction: 0.5,
            },
        }
    }

    #[test]
    fn valid_key_passes() {
        key().validate().unwrap();
    }

    #[test]
    fn bad_ranges_rejected() {
        let mut k = key();
        k.alpha = 1.0;
        k.beta = 1.0;
        assert!(k.validate().is_err());
        let mut k = key();
        k.n = 0;
        assert!(k.validate().is_err());
        let mut k = key();
        k.mapping = MappingConfig::Whitebox {
            layer: 2,
            unit_fraction: 0.0,
        };
        assert!(k.validate().is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let k = key();
        let json = serde_json::to_string(&k).unwrap();
        let back: EncodingKey = serde_json::from_str(&json).unwrap();
        assert_eq!(k, back);
    }
}
