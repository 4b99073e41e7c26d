use std::collections::BTreeMap;

use super::Keyword;
use crate::embedding::{cosine, EmbeddingMatrix};

/// Candidate pool size as a multiple of the requested keyword count.
pub const KEYWORD_CANDIDATE_FACTOR: usize = 3;

fn by_score_then_token(a: &(String, f64), b: &(String, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Re-ranks the strongest class terms by blending their normalized weight
/// with their cosine similarity to the topic centroid (equal weights).
/// Terms without a usable word vector keep only the weight half.
pub fn extract_keywords(
    weights: &BTreeMap<String, f64>,
    centroid: &[f64],
    word_emb: Option<&EmbeddingMatrix>,
    top_k: usize,
) -> Vec<Keyword> {
    let mut candidates: Vec<(String, f64)> = weights.iter().map(|(t, w)| (t.clone(), *w)).collect();
    candidates.sort_by(by_score_then_token);
    candidates.truncate(KEYWORD_CANDIDATE_FACTOR * top_k);
    let max_w = candidates.first().map(|c| c.1).unwrap_or(0.0);

    let lookup = word_emb.map(|m| (m, m.index()));
    let mut scored: Vec<(String, f64)> = candidates
        .into_iter()
        .map(|(token, w)| {
            let norm = if max_w > 0.0 { w / max_w } else { 0.0 };
            let sim = lookup
                .as_ref()
                .and_then(|(m, idx)| idx.get(token.as_str()).map(|&i| m.row(i)))
                .filter(|v| v.len() == centroid.len())
                .and_then(|v| cosine(v, centroid).ok());
            let score = match sim {
                Some(s) => 0.5 * norm + 0.5 * s,
                None => 0.5 * norm,
            };
            (token, score)
        })
        .collect();
    scored.sort_by(by_score_then_token);
    scored.truncate(top_k);
    scored
        .into_iter()
        .map(|(token, score)| Keyword { token, score })
        .collect()
}
