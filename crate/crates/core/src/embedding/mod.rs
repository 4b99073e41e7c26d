//! Embedding interchange: the matrix type, the TSV file format, and three
//! providers (file, HTTP service, deterministic hashing).

mod file;
mod hash;
mod http;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use file::{format_sig9, load_embeddings, parse_embeddings, save_embeddings, write_embeddings};
pub use hash::hash_embed;
pub use http::fetch_embeddings;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("line {line}: {reason}")]
    FormatError { line: usize, reason: String },
    #[error("line {line}: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize, line: usize },
    #[error("line {line}: non-finite value")]
    NonFiniteValue { line: usize },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("cosine of a zero vector")]
    ZeroVector,
    #[error("embedding service unreachable: {0}")]
    Unreachable(String),
    #[error("embedding service returned {status}: {body}")]
    BadResponse { status: u16, body: String },
    #[error("embedding service omitted ids: {0:?}")]
    PartialResponse(Vec<String>),
    #[error("invalid provider config: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    #[default]
    Document,
    Word,
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingKind::Document => "document",
            EmbeddingKind::Word => "word",
        })
    }
}

impl FromStr for EmbeddingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "document" => Ok(EmbeddingKind::Document),
            "word" => Ok(EmbeddingKind::Word),
            other => Err(format!("unknown embedding kind `{other}`")),
        }
    }
}

/// Dense row-major n×dim matrix keyed by unique string ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    ids: Vec<String>,
    dim: usize,
    data: Vec<f64>,
    kind: EmbeddingKind,
}

impl EmbeddingMatrix {
    /// Validates ids, dimensions and finiteness.
    pub fn new(ids: Vec<String>, rows: Vec<Vec<f64>>, dim: usize, kind: EmbeddingKind) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::FormatError {
                line: 0,
                reason: "dim must be at least 1".to_string(),
            });
        }
        if ids.len() != rows.len() {
            return Err(EmbeddingError::FormatError {
                line: 0,
                reason: format!("{} ids for {} rows", ids.len(), rows.len()),
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, (id, row)) in ids.iter().zip(&rows).enumerate() {
            if !seen.insert(id.as_str()) {
                return Err(EmbeddingError::DuplicateId(id.clone()));
            }
            if row.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                    line: i + 1,
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(EmbeddingError::NonFiniteValue { line: i + 1 });
            }
            data.extend_from_slice(row);
        }
        Ok(EmbeddingMatrix { ids, dim, data, kind })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// id → row index lookup table.
    pub fn index(&self) -> std::collections::HashMap<&str, usize> {
        self.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect()
    }

    /// Rows for `ids`, in that order. Returns the first missing id on failure.
    pub fn select(&self, ids: &[String]) -> Result<EmbeddingMatrix, String> {
        let index = self.index();
        let mut data = Vec::with_capacity(ids.len() * self.dim);
        for id in ids {
            let i = *index.get(id.as_str()).ok_or_else(|| id.clone())?;
            data.extend_from_slice(self.row(i));
        }
        Ok(EmbeddingMatrix {
            ids: ids.to_vec(),
            dim: self.dim,
            data,
            kind: self.kind,
        })
    }
}

/// `a·b / (‖a‖‖b‖)`, clamped to [−1, 1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, EmbeddingError> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProviderMode {
    File,
    Http,
    #[default]
    Hash,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingProviderConfig {
    pub mode: ProviderMode,
    pub endpoint: Option<String>,
    pub batch_size: usize,
    #[serde(with = "duration_secs")]
    pub timeout: Duration,
    pub auth_token_env: String,
    /// Concurrent batches in flight.
    pub concurrency: usize,
    /// Base delay of the exponential retry backoff.
    #[serde(with = "duration_millis")]
    pub backoff: Duration,
}

impl Default for EmbeddingProviderConfig {
    fn default() -> Self {
        EmbeddingProviderConfig {
            mode: ProviderMode::Hash,
            endpoint: None,
            batch_size: 32,
            timeout: Duration::from_secs(30),
            auth_token_env: "EMBED_API_TOKEN".to_string(),
            concurrency: 4,
            backoff: Duration::from_millis(200),
        }
    }
}

impl EmbeddingProviderConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        match (self.mode, &self.endpoint) {
            (ProviderMode::Http, None) => Err(EmbeddingError::Config("endpoint required for http mode".into())),
            (ProviderMode::File | ProviderMode::Hash, Some(_)) => {
                Err(EmbeddingError::Config("endpoint only allowed in http mode".into()))
            }
            _ if self.batch_size == 0 => Err(EmbeddingError::Config("batch_size must be positive".into())),
            _ => Ok(()),
        }
    }
}

pub(crate) mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod duration_millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}
