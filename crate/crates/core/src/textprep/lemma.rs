//! Dictionary lemmatizer with a suffix-rule fallback.

use std::collections::{HashMap, HashSet};

use super::TextprepError;

const BUNDLED: &str = include_str!("../../data/lemmas.tsv");

/// Maps inflected forms to lemmas. Chains in the table (`a -> b`, `b -> c`)
/// are resolved at load time so every lemma is terminal.
#[derive(Debug, Clone)]
pub struct Lemmatizer {
    table: HashMap<String, String>,
    lemmas: HashSet<String>,
}

impl Default for Lemmatizer {
    fn default() -> Self {
        Lemmatizer::from_tsv(BUNDLED).expect("bundled lemma table is valid")
    }
}

impl Lemmatizer {
    /// Parses `inflected<TAB>lemma` lines; `#` starts a comment.
    pub fn from_tsv(text: &str) -> Result<Self, TextprepError> {
        let mut raw: HashMap<String, String> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (inflected, lemma) = line.split_once('\t').ok_or_else(|| TextprepError::LemmaTable {
                line: i + 1,
                reason: "expected `inflected<TAB>lemma`".to_string(),
            })?;
            let (inflected, lemma) = (inflected.trim().to_lowercase(), lemma.trim().to_lowercase());
            if inflected.is_empty() || lemma.is_empty() {
                return Err(TextprepError::LemmaTable {
                    line: i + 1,
                    reason: "empty column".to_string(),
                });
            }
            raw.insert(inflected, lemma);
        }

        let mut table = HashMap::with_capacity(raw.len());
        for key in raw.keys() {
            let mut seen = HashSet::new();
            let mut cur = key.clone();
            while let Some(next) = raw.get(&cur) {
                if next == &cur {
                    break;
                }
                if !seen.insert(cur.clone()) {
                    return Err(TextprepError::LemmaTable {
                        line: 0,
                        reason: format!("cycle through `{key}`"),
                    });
                }
                cur = next.clone();
            }
            table.insert(key.clone(), cur);
        }
        let lemmas = table.values().cloned().collect();
        Ok(Lemmatizer { table, lemmas })
    }

    fn step(&self, word: &str) -> String {
        if let Some(l) = self.table.get(word) {
            return l.clone();
        }
        if self.lemmas.contains(word) || !word.chars().all(|c| c.is_ascii_lowercase()) {
            return word.to_string();
        }
        suffix_rule(word).unwrap_or_else(|| word.to_string())
    }

    fn lemmatize_word(&self, word: &str) -> String {
        let mut cur = word.to_string();
        // Each suffix step shortens the word, so this terminates.
        loop {
            let next = self.step(&cur);
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    /// Lemmatizes one token. Bigram tokens (`a_b`) are lemmatized part-wise.
    pub fn lemmatize_token(&self, token: &str) -> String {
        if token.contains('_') {
            token
                .split('_')
                .map(|p| self.lemmatize_word(p))
                .collect::<Vec<_>>()
                .join("_")
        } else {
            self.lemmatize_word(token)
        }
    }

    pub fn lemmatize(&self, tokens: &[String]) -> Vec<String> {
        tokens.iter().map(|t| self.lemmatize_token(t)).collect()
    }
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(|c| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'))
}

fn undouble(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !matches!(b[n - 1], b'a' | b'e' | b'i' | b'o' | b'u' | b'l' | b's' | b'z') {
        stem[..n - 1].to_string()
    } else {
        stem.to_string()
    }
}

fn suffix_rule(w: &str) -> Option<String> {
    let n = w.len();
    if n > 4 && w.ends_with("ies") {
        return Some(format!("{}y", &w[..n - 3]));
    }
    if w.ends_with("sses") {
        return Some(w[..n - 2].to_string());
    }
    if n > 3 && w.ends_with('s') && !["ss", "us", "is", "ous"].iter().any(|s| w.ends_with(s)) {
        return Some(w[..n - 1].to_string());
    }
    if let Some(stem) = w.strip_suffix("ing") {
        if stem.len() >= 3 && has_vowel(stem) {
            return Some(undouble(stem));
        }
    }
    if let Some(stem) = w.strip_suffix("ed") {
        if stem.len() >= 4 && has_vowel(stem) && !w.ends_with("eed") {
            return Some(undouble(stem));
        }
    }
    None
}
