//! Query surfaces over a released model.
//!
//! An oracle exposes the mapped representation `h(x)` the discriminator
//! reads: direct access to masked, tanh-squashed activations for a local
//! checkpoint (white-box), or the log of a returned probability vector
//! (black-box). The black-box path also works against a remote prediction
//! API speaking a one-request-per-record protocol: POST a JSON array of `q`
//! features, receive a JSON array of `c` probabilities.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::encoder::{build_mapping, Mapping};
use crate::error::{Error, Result};
use crate::key::EncodingKey;
use crate::nn::{log_probs, MlpModel};

/// Read-only query surface exposing `h(x)`. Queries may be issued from many
/// threads.
pub trait ModelOracle: Sync {
    /// The mapped representation of one record.
    fn query(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Dimension of the returned representation.
    fn dim(&self) -> usize;

    /// Number of queries served so far.
    fn query_count(&self) -> u64;
}

/// The oracle a key's mapping mode calls for against a local model.
pub fn oracle_for(model: MlpModel, key: &EncodingKey) -> Result<Box<dyn ModelOracle>> {
    match key.mapping {
        crate::key::MappingConfig::Whitebox { .. } => {
            Ok(Box::new(WhiteboxOracle::new(model, key)?))
        }
        crate::key::MappingConfig::Blackbox => {
            if model.input_dim() != key.q {
                return Err(Error::KeyMismatch(format!(
                    "key q={} but model input dimension is {}",
                    key.q,
                    model.input_dim()
                )));
            }
            Ok(Box::new(BlackboxOracle::new(model)))
        }
    }
}

/// White-box access: the key's mapping applied to a loaded checkpoint.
pub struct WhiteboxOracle {
    model: MlpModel,
    mapping: Mapping,
    queries: AtomicU64,
}

impl WhiteboxOracle {
    pub fn new(model: MlpModel, key: &EncodingKey) -> Result<Self> {
        if model.input_dim() != key.q {
            return Err(Error::KeyMismatch(format!(
                "key q={} but model input dimension is {}",
                key.q,
                model.input_dim()
            )));
        }
        let mapping = build_mapping(&model, key)?;
        Ok(Self {
            model,
            mapping,
            queries: AtomicU64::new(0),
        })
    }
}

impl ModelOracle for WhiteboxOracle {
    fn query(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let acts = self.model.forward_all(x)?;
        Ok(self.mapping.apply(&acts))
    }

    fn dim(&self) -> usize {
        self.mapping.dim()
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// Black-box access to a local model: log of the softmax output.
pub struct BlackboxOracle {
    model: MlpModel,
    queries: AtomicU64,
}

impl BlackboxOracle {
    pub fn new(model: MlpModel) -> Self {
        Self {
            model,
            queries: AtomicU64::new(0),
        }
    }
}

impl ModelOracle for BlackboxOracle {
    fn query(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let probs = self.model.forward_probs(x)?;
        Ok(log_probs(&probs))
    }

    fn dim(&self) -> usize {
        self.model.classes()
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// Black-box access to a remote prediction API. Each query POSTs the
/// feature vector as a JSON array and expects a JSON array of `classes`
/// probabilities back; the log transform is applied on this side.
pub struct HttpOracle {
    url: String,
    classes: usize,
    agent: ureq::Agent,
    queries: AtomicU64,
}

impl HttpOracle {
    pub fn new(url: impl Into<String>, classes: usize) -> Result<Self> {
        if classes == 0 {
            return Err(Error::invalid("class count must be >= 1"));
        }
        Ok(Self {
            url: url.into(),
            classes,
            agent: ureq::AgentBuilder::new().build(),
            queries: AtomicU64::new(0),
        })
    }
}

impl ModelOracle for HttpOracle {
    fn query(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let body = serde_json::to_string(x).expect("floats serialize");
        let response = self
            .agent
            .post(&self.url)
            .set("content-type", "application/json")
            .send_string(&body)
            .map_err(|e| Error::Oracle(e.to_string()))?;
        let text = response
            .into_string()
            .map_err(|e| Error::Oracle(e.to_string()))?;
        let probs: Vec<f64> =
            serde_json::from_str(&text).map_err(|e| Error::Oracle(format!("bad response: {e}")))?;
        if probs.len() != self.classes {
            return Err(Error::Oracle(format!(
                "endpoint returned {} probabilities, expected {}",
                probs.len(),
                self.classes
            )));
        }
        Ok(log_probs(&probs))
    }

    fn dim(&self) -> usize {
        self.classes
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::MappingConfig;
    use crate::nn::Activation;

    fn model() -> MlpModel {
        MlpModel::feedforward(4, &[6], 3, Activation::Relu, 1).unwrap()
    }

    #[test]
    fn whitebox_returns_masked_tanh_activations() {
        let key = EncodingKey {
            seed: 3,
            n: 5,
            q: 4,
            alpha: 0.0,
            beta: 1.0,
            mapping: MappingConfig::Whitebox {
                layer: 1,
                unit_fraction: 0.5,
            },
        };
        let oracle = WhiteboxOracle::new(model(), &key).unwrap();
        assert_eq!(oracle.dim(), 3);
        let h = oracle.query(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(h.len(), 3);
        assert!(h.iter().all(|v| v.abs() <= 1.0));
        assert_eq!(oracle.query_count(), 1);
    }

    #[test]
    fn blackbox_returns_log_probabilities() {
        let m = model();
        let x = [0.5, -0.5, 0.25, 1.0];
        let probs = m.forward_probs(&x).unwrap();
        let oracle = BlackboxOracle::new(m);
        let h = oracle.query(&x).unwrap();
        for (hi, p) in h.iter().zip(&probs) {
            assert!((hi - p.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn whitebox_rejects_wrong_dimension_key() {
        let key = EncodingKey {
            seed: 3,
            n: 5,
            q: 7,
            alpha: 0.0,
            beta: 1.0,
            mapping: MappingConfig::Blackbox,
        };
        assert!(matches!(
            WhiteboxOracle::new(model(), &key),
            Err(Error::KeyMismatch(_))
        ));
    }
}
