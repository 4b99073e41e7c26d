//! Density-based topic extraction over document embeddings.

mod ctfidf;
mod fit;
mod hdbscan;
mod io;
mod keywords;
mod reduce;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingError;

pub use ctfidf::{class_term_weights, term_distribution};
pub use fit::{fit, fit_with};
pub use hdbscan::{cluster_density, NOISE};
pub use io::{read_assignment_csv, read_topics_json, write_assignment_csv, write_topics_json, write_topics_jsonl};
pub use keywords::{extract_keywords, KEYWORD_CANDIDATE_FACTOR};
pub use reduce::{reduce_dimensions, DimensionReducer, Pca};

#[derive(Debug, Error)]
pub enum TopicError {
    #[error("invalid topic model configuration: {0}")]
    InvalidConfig(String),
    #[error("too few points: got {got}, need at least {need}")]
    TooFewPoints { got: usize, need: usize },
    #[error("topic {0} has no tokens")]
    EmptyVocabulary(i64),
    #[error("no embedding for record `{0}`")]
    MissingEmbedding(String),
    #[error("malformed topic file: {0}")]
    Format(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    OneStage,
    TwoStage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopicModelConfig {
    pub stage1_min_cluster: usize,
    pub stage2_min_cluster: usize,
    pub reduced_dim: usize,
    /// Falls back to the stage's minimum cluster size.
    pub min_samples: Option<usize>,
    pub top_k_keywords: usize,
    pub strategy: Strategy,
    pub seed: u64,
}

impl Default for TopicModelConfig {
    fn default() -> Self {
        TopicModelConfig {
            stage1_min_cluster: 30,
            stage2_min_cluster: 15,
            reduced_dim: 5,
            min_samples: None,
            top_k_keywords: 10,
            strategy: Strategy::TwoStage,
            seed: 0,
        }
    }
}

impl TopicModelConfig {
    pub fn validate(&self) -> Result<(), TopicError> {
        let bad = |m: &str| Err(TopicError::InvalidConfig(m.to_string()));
        if self.stage2_min_cluster < 2 {
            return bad("stage2_min_cluster must be at least 2");
        }
        if self.stage1_min_cluster < self.stage2_min_cluster {
            return bad("stage1_min_cluster must be >= stage2_min_cluster");
        }
        if self.reduced_dim < 2 {
            return bad("reduced_dim must be at least 2");
        }
        if self.top_k_keywords == 0 {
            return bad("top_k_keywords must be at least 1");
        }
        if self.min_samples == Some(0) {
            return bad("min_samples must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn min_samples_for(&self, min_cluster: usize) -> usize {
        self.min_samples.unwrap_or(min_cluster)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicAssignment {
    pub labels: BTreeMap<String, i64>,
    /// (stage-1 cluster, stage-2 topic) per record; empty for one-stage runs.
    pub stage_path: BTreeMap<String, (i64, i64)>,
}

impl TopicAssignment {
    pub fn n_topics(&self) -> usize {
        self.labels
            .values()
            .filter(|l| **l >= 0)
            .map(|l| *l as usize + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn members(&self, topic: i64) -> Vec<String> {
        self.labels
            .iter()
            .filter(|(_, l)| **l == topic)
            .map(|(id, _)| id.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub token: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub topic_id: i64,
    pub doc_ids: Vec<String>,
    pub term_dist: BTreeMap<String, f64>,
    pub keywords: Vec<Keyword>,
    pub centroid: Vec<f64>,
}

impl Topic {
    pub fn keyword_tokens(&self) -> Vec<&str> {
        self.keywords.iter().map(|k| k.token.as_str()).collect()
    }
}
