use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::record::BiblioRecord;

pub const DEFAULT_RELEVANCE_TERMS: [&str; 4] = ["disaster", "crisis", "pandemic", "COVID-19"];

/// Staged accounting of a screening run. `final_count = collected - Σ removed_*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PrismaReport {
    pub collected: usize,
    pub removed_duplicates: usize,
    pub removed_no_abstract: usize,
    pub removed_irrelevant: usize,
    pub removed_non_english: usize,
    pub removed_retracted: usize,
    #[serde(rename = "final")]
    pub final_count: usize,
}

impl PrismaReport {
    pub fn removed_total(&self) -> usize {
        self.removed_duplicates
            + self.removed_no_abstract
            + self.removed_irrelevant
            + self.removed_non_english
            + self.removed_retracted
    }

    pub fn rows(&self) -> [(&'static str, usize); 7] {
        [
            ("collected", self.collected),
            ("removed_duplicates", self.removed_duplicates),
            ("removed_no_abstract", self.removed_no_abstract),
            ("removed_irrelevant", self.removed_irrelevant),
            ("removed_non_english", self.removed_non_english),
            ("removed_retracted", self.removed_retracted),
            ("final", self.final_count),
        ]
    }

    /// Flat `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.rows() {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// Two-column `stage,count` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,count\n");
        for (k, v) in self.rows() {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }
}

fn normalize_title(title: &str) -> String {
    let folded: String = title
        .to_lowercase()
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() {
                c
            } else {
                ' '
            }
        })
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Normalized DOI when present, otherwise normalized title plus year.
pub fn dedup_key(record: &BiblioRecord) -> String {
    match record.doi.as_deref().map(str::trim).filter(|d| !d.is_empty()) {
        Some(doi) => format!("doi:{}", doi.to_lowercase()),
        None => format!("title:{}|{}", normalize_title(&record.title), record.year),
    }
}

/// Keeps the first record of every dedup key, preserving input order.
pub fn deduplicate(records: Vec<BiblioRecord>) -> (Vec<BiblioRecord>, usize) {
    let mut seen = HashSet::new();
    let before = records.len();
    let kept: Vec<BiblioRecord> = records.into_iter().filter(|r| seen.insert(dedup_key(r))).collect();
    let removed = before - kept.len();
    (kept, removed)
}

fn is_relevant(record: &BiblioRecord, terms_lower: &[String]) -> bool {
    let haystack = format!("{} {}", record.title, record.abstract_text).to_lowercase();
    terms_lower.iter().any(|t| haystack.contains(t.as_str()))
}

/// Applies the removal stages in fixed order: duplicates, empty abstract,
/// irrelevant, non-English, retracted. Each record is counted once, under the
/// first stage that removes it.
///
/// A missing language is treated as English. Empty `relevance_terms` falls
/// back to [`DEFAULT_RELEVANCE_TERMS`].
pub fn screen(records: Vec<BiblioRecord>, relevance_terms: &[String]) -> (Vec<BiblioRecord>, PrismaReport) {
    let terms: Vec<String> = if relevance_terms.is_empty() {
        log::warn!("no relevance terms given; using defaults");
        DEFAULT_RELEVANCE_TERMS.iter().map(|t| t.to_lowercase()).collect()
    } else {
        relevance_terms.iter().map(|t| t.to_lowercase()).collect()
    };
    let mut report = PrismaReport {
        collected: records.len(),
        ..Default::default()
    };
    let (deduped, dups) = deduplicate(records);
    report.removed_duplicates = dups;

    let mut kept = Vec::with_capacity(deduped.len());
    for r in deduped {
        if r.abstract_text.trim().is_empty() {
            report.removed_no_abstract += 1;
        } else if !is_relevant(&r, &terms) {
            report.removed_irrelevant += 1;
        } else if r.language.as_deref().is_some_and(|l| l != "en") {
            report.removed_non_english += 1;
        } else if r.retracted {
            report.removed_retracted += 1;
        } else {
            kept.push(r);
        }
    }
    report.final_count = kept.len();
    (kept, report)
}
