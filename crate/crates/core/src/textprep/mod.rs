//! Text sanitization for keyword statistics: tokenization, stop-word
//! removal, bigram merging and lemmatization.

mod bigrams;
mod lemma;
mod tokenize;

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bigrams::{apply_bigrams, learn_bigrams, BigramModel, DEFAULT_MIN_COUNT, DEFAULT_THRESHOLD};
pub use lemma::Lemmatizer;
pub use tokenize::tokenize;

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

#[derive(Debug, Error)]
pub enum TextprepError {
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("stop-word file line {line}: `{entry}` contains whitespace")]
    Stopword { line: usize, entry: String },
    #[error("lemma table line {line}: {reason}")]
    LemmaTable { line: usize, reason: String },
    #[error("sanitized corpus line {line}: {reason}")]
    Jsonl { line: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    pub words: BTreeSet<String>,
    pub provenance: String,
}

impl Default for StopwordList {
    fn default() -> Self {
        StopwordList::parse(BUNDLED_STOPWORDS, "bundled English list with abstract boilerplate")
            .expect("bundled stop-word list is valid")
    }
}

impl StopwordList {
    /// One token per line, `#` comments. Entries are lowercased.
    pub fn parse(text: &str, provenance: &str) -> Result<Self, TextprepError> {
        let mut words = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let entry = line.split('#').next().unwrap_or("").trim();
            if entry.is_empty() {
                continue;
            }
            if entry.chars().any(char::is_whitespace) {
                return Err(TextprepError::Stopword {
                    line: i + 1,
                    entry: entry.to_string(),
                });
            }
            words.insert(entry.to_lowercase());
        }
        Ok(StopwordList {
            words,
            provenance: provenance.to_string(),
        })
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }
}

pub fn remove_stopwords(tokens: &[String], list: &StopwordList) -> Vec<String> {
    tokens.iter().filter(|t| !list.contains(t)).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SanitizedDoc {
    pub record_id: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TextPrep {
    pub stopwords: StopwordList,
    pub lemmatizer: Lemmatizer,
    pub min_count: usize,
    pub threshold: f64,
}

impl Default for TextPrep {
    fn default() -> Self {
        TextPrep {
            stopwords: StopwordList::default(),
            lemmatizer: Lemmatizer::default(),
            min_count: DEFAULT_MIN_COUNT,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl TextPrep {
    /// Tokenize and drop stop words, then learn bigrams over the whole corpus,
    /// merge them and lemmatize. Stop words are filtered once more after
    /// lemmatization since a lemma can itself be a stop word.
    pub fn sanitize(&self, docs: &[(String, String)]) -> Result<(Vec<SanitizedDoc>, BigramModel), TextprepError> {
        let filtered: Vec<Vec<String>> = docs
            .iter()
            .map(|(_, text)| remove_stopwords(&tokenize(text), &self.stopwords))
            .collect();
        let model = learn_bigrams(&filtered, self.min_count, self.threshold)?;
        let out = docs
            .iter()
            .zip(filtered)
            .map(|((id, _), tokens)| {
                let merged = apply_bigrams(&tokens, &model);
                let lemmas = self.lemmatizer.lemmatize(&merged);
                SanitizedDoc {
                    record_id: id.clone(),
                    tokens: remove_stopwords(&lemmas, &self.stopwords)
                        .into_iter()
                        .filter(|t| !t.is_empty())
                        .collect(),
                }
            })
            .collect();
        Ok((out, model))
    }
}

pub fn write_sanitized_jsonl<W: Write>(docs: &[SanitizedDoc], mut w: W) -> Result<(), TextprepError> {
    for d in docs {
        serde_json::to_writer(&mut w, d).map_err(|e| TextprepError::Io(e.into()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_sanitized_jsonl<R: BufRead>(r: R) -> Result<Vec<SanitizedDoc>, TextprepError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc = serde_json::from_str(&line).map_err(|e| TextprepError::Jsonl {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(doc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn default_list_removes_boilerplate() {
        let list = StopwordList::default();
        assert_eq!(remove_stopwords(&toks("the virus"), &list), toks("virus"));
        assert_eq!(remove_stopwords(&toks("method results virus"), &list), toks("virus"));
        assert!(remove_stopwords(&[], &list).is_empty());
    }

    #[test]
    fn custom_list_parsing() {
        let l = StopwordList::parse("# c\nFoo\n bar # trailing\n", "test").unwrap();
        assert!(l.contains("foo") && l.contains("bar"));
        assert!(StopwordList::parse("two words\n", "bad").is_err());
    }

    #[test]
    fn sanitize_end_to_end() {
        let docs: Vec<(String, String)> = (0..8)
            .map(|i| {
                (
                    format!("r{i}"),
                    format!("The plastic waste crisis; results show running hospitals {i}x."),
                )
            })
            .collect();
        let prep = TextPrep {
            min_count: 2,
            threshold: 0.5,
            ..TextPrep::default()
        };
        let (out, model) = prep.sanitize(&docs).unwrap();
        assert!(model.accepts("plastic", "waste"));
        assert_eq!(out[0].record_id, "r0");
        assert!(out[0].tokens.contains(&"plastic_waste".to_string()));
        assert!(!out[0].tokens.iter().any(|t| prep.stopwords.contains(t)));
    }

    #[test]
    fn jsonl_roundtrip() {
        let docs = vec![SanitizedDoc {
            record_id: "a".into(),
            tokens: toks("x y_z"),
        }];
        let mut buf = Vec::new();
        write_sanitized_jsonl(&docs, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "{\"record_id\":\"a\",\"tokens\":[\"x\",\"y_z\"]}\n"
        );
        assert_eq!(read_sanitized_jsonl(buf.as_slice()).unwrap(), docs);
    }
}
