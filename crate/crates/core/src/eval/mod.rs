//! Topic model quality metrics and model comparison.

mod metrics;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::SanitizedDoc;
use crate::topics::{Topic, TopicAssignment};

pub use metrics::{
    coherence, diversity, embedding_similarity, perplexity, topic_significance, METRIC_KEYWORDS, SMOOTHING,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need at least {need} keywords, got {got}")]
    TooFewKeywords { need: usize, got: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("model has no topics")]
    NoTopics,
    #[error("no non-noise documents to score")]
    NoScorableDocs,
    #[error("assignment references unknown topic {0}")]
    UnknownTopic(i64),
    #[error("centroid {0} is the zero vector")]
    ZeroVector(usize),
    #[error("need {need} topics, model has {got}")]
    NotEnoughTopics { need: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model_name: String,
    pub n_topics: usize,
    pub avg_coherence: f64,
    pub perplexity: f64,
    pub diversity: f64,
    /// Undefined for a single topic.
    pub avg_embedding_similarity: Option<f64>,
    pub avg_significance: f64,
    pub per_topic_significance: BTreeMap<i64, f64>,
}

/// Distinct terms across the corpus and every topic's distribution.
pub fn vocabulary_size(docs: &[SanitizedDoc], topics: &[Topic]) -> usize {
    let mut vocab: BTreeSet<&str> = docs.iter().flat_map(|d| d.tokens.iter().map(String::as_str)).collect();
    for t in topics {
        vocab.extend(t.term_dist.keys().map(String::as_str));
    }
    vocab.len()
}

/// Computes every metric for one fitted model. Noise documents take part in
/// neither coherence nor perplexity; averages are unweighted over topics.
pub fn evaluate_model(
    name: &str,
    assignment: &TopicAssignment,
    topics: &[Topic],
    docs: &[SanitizedDoc],
) -> Result<ModelReport, EvalError> {
    if topics.is_empty() {
        return Err(EvalError::NoTopics);
    }
    let vocab = vocabulary_size(docs, topics);
    let scored: BTreeMap<&str, &[String]> = docs
        .iter()
        .filter(|d| assignment.labels.get(&d.record_id).is_some_and(|l| *l >= 0))
        .map(|d| (d.record_id.as_str(), d.tokens.as_slice()))
        .collect();
    let scored_docs: Vec<&[String]> = scored.values().copied().collect();

    let mut coherences = Vec::with_capacity(topics.len());
    let mut keyword_lists = Vec::with_capacity(topics.len());
    for t in topics {
        let kws: Vec<&str> = t.keyword_tokens().into_iter().take(METRIC_KEYWORDS).collect();
        coherences.push(coherence(&kws, &scored_docs)?);
        keyword_lists.push(kws);
    }
    let centroids: Vec<&[f64]> = topics.iter().map(|t| t.centroid.as_slice()).collect();
    let similarity = embedding_similarity(&centroids)?;
    if similarity.is_none() {
        log::warn!("model `{name}` has a single topic; embedding similarity is undefined");
    }
    let per_topic_significance: BTreeMap<i64, f64> = topics
        .iter()
        .map(|t| (t.topic_id, topic_significance(&t.term_dist, vocab)))
        .collect();

    Ok(ModelReport {
        model_name: name.to_string(),
        n_topics: topics.len(),
        avg_coherence: metrics::sorted_mean(coherences),
        perplexity: perplexity(assignment, topics, &scored, vocab)?,
        diversity: diversity(&keyword_lists)?,
        avg_embedding_similarity: similarity,
        avg_significance: metrics::sorted_mean(per_topic_significance.values().copied().collect()),
        per_topic_significance,
    })
}

/// The `k` most significant topics, highest first; ties go to the smaller id.
pub fn select_top_significant(per_topic: &BTreeMap<i64, f64>, k: usize) -> Result<Vec<i64>, EvalError> {
    if k > per_topic.len() {
        return Err(EvalError::NotEnoughTopics {
            need: k,
            got: per_topic.len(),
        });
    }
    let mut ranked: Vec<(i64, f64)> = per_topic.iter().map(|(t, s)| (*t, *s)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked.into_iter().take(k).map(|(t, _)| t).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Better {
    Higher,
    Lower,
}

impl Better {
    fn arrow(self) -> &'static str {
        match self {
            Better::Higher => "↑",
            Better::Lower => "↓",
        }
    }
}

type MetricRow = (&'static str, Better, fn(&ModelReport) -> Option<f64>);

/// Row label, preferred direction and accessor for each reported metric.
pub const METRIC_ROWS: [MetricRow; 5] = [
    ("Coherence", Better::Higher, |r| Some(r.avg_coherence)),
    ("Perplexity", Better::Lower, |r| Some(r.perplexity)),
    ("Diversity", Better::Higher, |r| Some(r.diversity)),
    ("Embedding similarity", Better::Lower, |r| r.avg_embedding_similarity),
    ("Topic significance", Better::Higher, |r| Some(r.avg_significance)),
];

/// Index of the best model for one metric row, following the row's direction.
pub fn best_index(reports: &[ModelReport], row: &MetricRow) -> Option<usize> {
    let (_, better, get) = row;
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in reports.iter().enumerate() {
        let Some(v) = get(r) else { continue };
        let wins = match best {
            None => true,
            Some((_, b)) => match better {
                Better::Higher => v > b,
                Better::Lower => v < b,
            },
        };
        if wins {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Metric rows by model columns; the best value in each row carries `*`.
pub fn render_comparison(reports: &[ModelReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.model_name.chars().count())
        .max()
        .unwrap_or(0)
        .max(10)
        + 2;
    let mut out = format!("{:<24}", "Metric");
    for r in reports {
        let _ = write!(out, "{:>width$}", r.model_name);
    }
    out.push('\n');
    let _ = write!(out, "{:<24}", "Topics");
    for r in reports {
        let _ = write!(out, "{:>width$}", r.n_topics);
    }
    out.push('\n');
    for row in &METRIC_ROWS {
        let best = best_index(reports, row);
        let _ = write!(out, "{:<24}", format!("{} ({})", row.0, row.1.arrow()));
        for (i, r) in reports.iter().enumerate() {
            let cell = match (row.2)(r) {
                Some(v) if best == Some(i) => format!("{v:.4}*"),
                Some(v) => format!("{v:.4}"),
                None => "n/a".to_string(),
            };
            let _ = write!(out, "{cell:>width$}");
        }
        out.push('\n');
    }
    out
}
