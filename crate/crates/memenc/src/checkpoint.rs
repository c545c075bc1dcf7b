//! Model checkpoints: a small binary container with a JSON text header, a
//! raw little-endian `f64` payload, and a trailing SHA-256 checksum.
//!
//! Layout:
//!
//! ```text
//! magic  b"MEMENCPT"                  8 bytes
//! version u32 LE (currently 1)        4 bytes
//! header_len u32 LE                   4 bytes
//! header JSON (architecture + meta)   header_len bytes
//! param_count u64 LE                  8 bytes
//! payload f64 LE                      param_count * 8 bytes
//! sha256 over everything above       32 bytes
//! ```
//!
//! Per layer, weights (row-major) precede biases. Save/load round-trips are
//! bit-exact; loads reject foreign versions, truncation, and corruption.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nn::{Activation, DenseLayer, MlpModel};

const MAGIC: &[u8; 8] = b"MEMENCPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    arch: Vec<LayerDescriptor>,
    #[serde(default)]
    meta: CheckpointMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LayerDescriptor {
    in_dim: usize,
    out_dim: usize,
    activation: Activation,
}

/// Side information stored with the parameters. The key fingerprint is a
/// hash of the secret seed, never the seed itself.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_fingerprint: Option<String>,
    /// Free-form training-config snapshot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

/// Hex SHA-256 of the key seed's little-endian bytes.
pub fn key_fingerprint(seed: u64) -> String {
    let digest = Sha256::digest(seed.to_le_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Serialize a checkpoint to bytes.
pub fn checkpoint_bytes(model: &MlpModel, meta: &CheckpointMeta) -> Vec<u8> {
    let header = Header {
        arch: model
            .layers()
            .iter()
            .map(|l| LayerDescriptor {
                in_dim: l.in_dim,
                out_dim: l.out_dim,
                activation: l.activation,
            })
            .collect(),
        meta: meta.clone(),
    };
    let header_json = serde_json::to_vec(&header).expect("header serializes");

    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    buf.extend_from_slice(&header_json);
    let param_count: u64 = model.param_count() as u64;
    buf.extend_from_slice(&param_count.to_le_bytes());
    for layer in model.layers() {
        for w in layer.weights.iter().chain(&layer.bias) {
            buf.extend_from_slice(&w.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    buf
}

/// Write a checkpoint atomically (write to a temp file, then rename).
pub fn save_checkpoint(model: &MlpModel, meta: &CheckpointMeta, path: &Path) -> Result<()> {
    let bytes = checkpoint_bytes(model, meta);
    atomic_write(path, &bytes)
}

/// Write-then-rename so failures never leave partial output files.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Parse checkpoint bytes.
pub fn parse_checkpoint(bytes: &[u8]) -> Result<(MlpModel, CheckpointMeta)> {
    let need = |n: usize, at: usize| -> Result<()> {
        if bytes.len() < at + n {
            Err(Error::Format("checkpoint truncated".into()))
        } else {
            Ok(())
        }
    };
    need(16, 0)?;
    if &bytes[0..8] != MAGIC {
        return Err(Error::Format("not a checkpoint file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(Error::Version {
            found: version,
            supported: CHECKPOINT_VERSION,
        });
    }
    let header_len = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
    need(header_len + 8, 16)?;
    let header: Header = serde_json::from_slice(&bytes[16..16 + header_len])
        .map_err(|e| Error::Format(format!("bad checkpoint header: {e}")))?;
    let mut at = 16 + header_len;
    let param_count =
        u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes")) as usize;
    at += 8;
    need(param_count * 8 + 32, at)?;
    let body_end = at + param_count * 8;

    let mut hasher = Sha256::new();
    hasher.update(&bytes[..body_end]);
    let digest = hasher.finalize();
    if digest.as_slice() != &bytes[body_end..body_end + 32] {
        return Err(Error::Checksum);
    }

    let expected: usize = header
        .arch
        .iter()
        .map(|d| d.in_dim * d.out_dim + d.out_dim)
        .sum();
    if expected != param_count {
        return Err(Error::Format(format!(
            "architecture wants {expected} parameters, payload has {param_count}"
        )));
    }

    let mut layers = Vec::with_capacity(header.arch.len());
    for d in &header.arch {
        let mut read = |n: usize| -> Vec<f64> {
            let vals = bytes[at..at + n * 8]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            at += n * 8;
            vals
        };
        let weights = read(d.in_dim * d.out_dim);
        let bias = read(d.out_dim);
        layers.push(DenseLayer {
            weights,
            bias,
            in_dim: d.in_dim,
            out_dim: d.out_dim,
            activation: d.activation,
        });
    }
    Ok((MlpModel::from_layers(layers)?, header.meta))
}

pub fn load_checkpoint(path: &Path) -> Result<(MlpModel, CheckpointMeta)> {
    let bytes = std::fs::read(path)?;
    parse_checkpoint(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> MlpModel {
        MlpModel::feedforward(5, &[7, 3], 4, Activation::Tanh, 42).unwrap()
    }

    fn meta() -> CheckpointMeta {
        CheckpointMeta {
            key_fingerprint: Some(key_fingerprint(0xDEADBEEF)),
            config: Some(serde_json::json!({"epochs": 80})),
        }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let m = model();
        save_checkpoint(&m, &meta(), &path).unwrap();
        let (back, got_meta) = load_checkpoint(&path).unwrap();
        assert_eq!(m, back);
        assert_eq!(got_meta, meta());
    }

    #[test]
    fn payload_corruption_fails_checksum() {
        let mut bytes = checkpoint_bytes(&model(), &meta());
        let payload_at = bytes.len() - 40; // inside the floats
        bytes[payload_at] ^= 0x01;
        assert!(matches!(parse_checkpoint(&bytes), Err(Error::Checksum)));
    }

    #[test]
    fn foreign_version_rejected() {
        let mut bytes = checkpoint_bytes(&model(), &meta());
        bytes[8] = 2;
        assert!(matches!(
            parse_checkpoint(&bytes),
            Err(Error::Version { found: 2, .. })
        ));
    }

    #[test]
    fn truncation_rejected() {
        let bytes = checkpoint_bytes(&model(), &meta());
        let cut = &bytes[..bytes.len() - 7];
        assert!(matches!(parse_checkpoint(cut), Err(Error::Format(_)) | Err(Error::Checksum)));
    }

    #[test]
    fn bad_magic_rejected() {
        let mut bytes = checkpoint_bytes(&model(), &meta());
        bytes[0] = b'X';
        assert!(matches!(parse_checkpoint(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn fingerprint_hides_the_seed() {
        let fp = key_fingerprint(42);
        assert_eq!(fp.len(), 64);
        assert_ne!(key_fingerprint(42), key_fingerprint(43));
        assert_eq!(key_fingerprint(42), key_fingerprint(42));
    }
}
