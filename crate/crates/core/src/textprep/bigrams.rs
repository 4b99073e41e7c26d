use std::collections::{BTreeMap, HashMap};

use super::TextprepError;

pub const DEFAULT_MIN_COUNT: usize = 5;
pub const DEFAULT_THRESHOLD: f64 = 10.0;

/// Scored adjacent token pairs. Only pairs seen at least `min_count` times
/// are stored; a pair is accepted when its score exceeds `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramModel {
    pub pair_scores: BTreeMap<(String, String), f64>,
    pub min_count: usize,
    pub threshold: f64,
}

impl BigramModel {
    pub fn empty(min_count: usize, threshold: f64) -> Self {
        BigramModel {
            pair_scores: BTreeMap::new(),
            min_count,
            threshold,
        }
    }

    pub fn accepts(&self, a: &str, b: &str) -> bool {
        // BTreeMap<(String, String)> cannot be probed with borrowed pairs.
        self.pair_scores
            .get(&(a.to_string(), b.to_string()))
            .is_some_and(|s| *s > self.threshold)
    }

    pub fn accepted_pairs(&self) -> impl Iterator<Item = (&(String, String), &f64)> {
        self.pair_scores.iter().filter(|(_, s)| **s > self.threshold)
    }
}

/// Counts adjacent pairs within each document and scores them as
/// `(count(a,b) - min_count) * vocab / (count(a) * count(b))`.
pub fn learn_bigrams(corpus: &[Vec<String>], min_count: usize, threshold: f64) -> Result<BigramModel, TextprepError> {
    let min_count = min_count.max(1);
    let mut unigrams: HashMap<&str, usize> = HashMap::new();
    let mut pairs: HashMap<(&str, &str), usize> = HashMap::new();
    for doc in corpus {
        for t in doc {
            *unigrams.entry(t.as_str()).or_default() += 1;
        }
        for w in doc.windows(2) {
            *pairs.entry((w[0].as_str(), w[1].as_str())).or_default() += 1;
        }
    }
    if unigrams.is_empty() {
        return Err(TextprepError::EmptyCorpus);
    }
    let vocab = unigrams.len() as f64;
    let mut pair_scores = BTreeMap::new();
    for ((a, b), count) in pairs {
        if count < min_count {
            continue;
        }
        let score = (count - min_count) as f64 * vocab / (unigrams[a] as f64 * unigrams[b] as f64);
        pair_scores.insert((a.to_string(), b.to_string()), score);
    }
    Ok(BigramModel {
        pair_scores,
        min_count,
        threshold,
    })
}

/// Single left-to-right pass; an accepted pair is merged into `a_b` and both
/// tokens are consumed.
pub fn apply_bigrams(tokens: &[String], model: &BigramModel) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if i + 1 < tokens.len() && model.accepts(&tokens[i], &tokens[i + 1]) {
            out.push(format!("{}_{}", tokens[i], tokens[i + 1]));
            i += 2;
        } else {
            out.push(tokens[i].clone());
            i += 1;
        }
    }
    out
}
