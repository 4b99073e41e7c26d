use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::EvalError;
use crate::embedding::cosine;
use crate::topics::{Topic, TopicAssignment};

/// Smoothing constant for probabilities that may be zero.
pub const SMOOTHING: f64 = 1e-12;

/// Number of keywords per topic the keyword metrics are defined on.
pub const METRIC_KEYWORDS: usize = 10;

fn npmi(p_i: f64, p_j: f64, p_ij: f64) -> f64 {
    if p_ij == 0.0 {
        return -1.0;
    }
    if p_ij >= 1.0 {
        return 1.0;
    }
    let joint = p_ij + SMOOTHING;
    ((joint / (p_i * p_j)).ln() / -joint.ln()).clamp(-1.0, 1.0)
}

/// Mean normalized PMI over all keyword pairs, from document-level
/// co-occurrence in `docs`.
pub fn coherence(keywords: &[&str], docs: &[&[String]]) -> Result<f64, EvalError> {
    if keywords.len() < 2 {
        return Err(EvalError::TooFewKeywords {
            need: 2,
            got: keywords.len(),
        });
    }
    if docs.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let wanted: HashSet<&str> = keywords.iter().copied().collect();
    let sets: Vec<HashSet<&str>> = docs
        .iter()
        .map(|d| d.iter().map(String::as_str).filter(|t| wanted.contains(t)).collect())
        .collect();
    let n = docs.len() as f64;
    let df = |w: &str| sets.iter().filter(|s| s.contains(w)).count() as f64 / n;
    let mut total = 0.0;
    let mut pairs = 0;
    for i in 0..keywords.len() {
        for j in i + 1..keywords.len() {
            let (a, b) = (keywords[i], keywords[j]);
            let joint = sets.iter().filter(|s| s.contains(a) && s.contains(b)).count() as f64 / n;
            total += npmi(df(a), df(b), joint);
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Per-token perplexity of the non-noise documents under their topic's term
/// distribution. Probabilities are smoothed by [`SMOOTHING`] and
/// renormalized over `vocab_size` terms.
pub fn perplexity(
    assignment: &TopicAssignment,
    topics: &[Topic],
    docs: &BTreeMap<&str, &[String]>,
    vocab_size: usize,
) -> Result<f64, EvalError> {
    let by_id: HashMap<i64, &Topic> = topics.iter().map(|t| (t.topic_id, t)).collect();
    let denom = 1.0 + vocab_size as f64 * SMOOTHING;
    let mut log_sum = 0.0;
    let mut tokens = 0usize;
    for (id, &label) in &assignment.labels {
        if label < 0 {
            continue;
        }
        let topic = by_id.get(&label).ok_or(EvalError::UnknownTopic(label))?;
        let Some(doc) = docs.get(id.as_str()) else {
            continue;
        };
        for w in doc.iter() {
            let p = topic.term_dist.get(w).copied().unwrap_or(0.0);
            log_sum += ((p + SMOOTHING) / denom).ln();
        }
        tokens += doc.len();
    }
    if tokens == 0 {
        return Err(EvalError::NoScorableDocs);
    }
    Ok((-log_sum / tokens as f64).exp())
}

/// Share of distinct words among every topic's top ten keywords.
pub fn diversity(keyword_lists: &[Vec<&str>]) -> Result<f64, EvalError> {
    if keyword_lists.is_empty() {
        return Err(EvalError::NoTopics);
    }
    let mut distinct: BTreeSet<&str> = BTreeSet::new();
    for list in keyword_lists {
        if list.len() < METRIC_KEYWORDS {
            return Err(EvalError::TooFewKeywords {
                need: METRIC_KEYWORDS,
                got: list.len(),
            });
        }
        distinct.extend(list.iter().take(METRIC_KEYWORDS).copied());
    }
    Ok(distinct.len() as f64 / (METRIC_KEYWORDS * keyword_lists.len()) as f64)
}

/// Mean pairwise cosine between topic centroids; `None` with fewer than two.
pub fn embedding_similarity(centroids: &[&[f64]]) -> Result<Option<f64>, EvalError> {
    for (i, c) in centroids.iter().enumerate() {
        if c.iter().all(|x| *x == 0.0) {
            return Err(EvalError::ZeroVector(i));
        }
    }
    if centroids.len() < 2 {
        return Ok(None);
    }
    let mut sims = Vec::new();
    for i in 0..centroids.len() {
        for j in i + 1..centroids.len() {
            sims.push(cosine(centroids[i], centroids[j]).map_err(|_| EvalError::ZeroVector(i))?);
        }
    }
    Ok(Some(sorted_mean(sims)))
}

/// KL divergence of a term distribution from the uniform distribution over
/// `vocab_size` terms, in nats.
pub fn topic_significance(term_dist: &BTreeMap<String, f64>, vocab_size: usize) -> f64 {
    let v = vocab_size as f64;
    term_dist
        .values()
        .filter(|p| **p > 0.0)
        .map(|p| p * (p * v).ln())
        .sum::<f64>()
        .max(0.0)
}

/// Mean that does not depend on the input order.
pub(crate) fn sorted_mean(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs.iter().sum::<f64>() / xs.len() as f64
}
