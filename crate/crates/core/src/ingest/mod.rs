//! Record ingestion: parsing bibliographic exports, deduplication, relevance
//! screening and PRISMA-style accounting.

mod canonical;
mod record;
mod screen;
mod tagged;

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canonical::{read_corpus_csv, write_corpus_csv, CANONICAL_HEADER};
pub use record::{
    build_corpus_text, normalize_doi, normalize_language, Affiliation, AuthorRef, BiblioRecord, SourceDb,
};
pub use screen::{dedup_key, deduplicate, screen, PrismaReport, DEFAULT_RELEVANCE_TERMS};
pub use tagged::split_affiliation;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {reason}")]
    FileUnreadable { path: String, reason: String },
    #[error("{0} contains no records")]
    EmptyFile(String),
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<csv::Error> for IngestError {
    fn from(e: csv::Error) -> Self {
        IngestError::Io(e.to_string())
    }
}

/// A per-record parse problem. Parsing continues past these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalformedRecord {
    /// 1-based position of the record in its file.
    pub ordinal: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Ris,
    Medline,
    Csv,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "ris" => Ok(InputFormat::Ris),
            "medline" | "nbib" | "pubmed" => Ok(InputFormat::Medline),
            "csv" => Ok(InputFormat::Csv),
            other => Err(format!("unknown input format `{other}`")),
        }
    }
}

#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub records: Vec<BiblioRecord>,
    pub errors: Vec<MalformedRecord>,
}

/// Parses one export file. Invalid UTF-8 is decoded lossily.
pub fn parse_records(path: &Path, format: InputFormat) -> Result<ParseOutcome, IngestError> {
    let bytes = fs::read(path).map_err(|e| IngestError::FileUnreadable {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let text = String::from_utf8_lossy(&bytes);
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".to_string());
    let outcome = parse_str(&text, format, &stem)?;
    if outcome.records.is_empty() {
        return Err(IngestError::EmptyFile(path.display().to_string()));
    }
    Ok(outcome)
}

/// Parses in-memory export text. `source_name` seeds generated record ids.
pub fn parse_str(text: &str, format: InputFormat, source_name: &str) -> Result<ParseOutcome, IngestError> {
    let (records, errors) = match format {
        InputFormat::Ris => tagged::parse_ris(text, &format!("ris:{source_name}")),
        InputFormat::Medline => tagged::parse_medline(text, &format!("medline:{source_name}")),
        InputFormat::Csv => read_corpus_csv(text.as_bytes())?,
    };
    Ok(ParseOutcome { records, errors })
}

/// Makes record ids unique across merged files by suffixing repeats with `#n`.
pub fn ensure_unique_ids(records: &mut [BiblioRecord]) {
    use std::collections::HashMap;
    let mut seen: HashMap<String, usize> = HashMap::new();
    for r in records.iter_mut() {
        let n = seen.entry(r.record_id.clone()).or_insert(0);
        *n += 1;
        if *n > 1 {
            let mut k = *n;
            let mut candidate = format!("{}#{k}", r.record_id);
            while seen.contains_key(&candidate) {
                k += 1;
                candidate = format!("{}#{k}", r.record_id);
            }
            seen.insert(candidate.clone(), 1);
            r.record_id = candidate;
        }
    }
}
