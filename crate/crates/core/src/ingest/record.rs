//! Unified bibliographic record model.

use std::fmt;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Database a record was exported from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SourceDb {
    Pubmed,
    Scopus,
    Wos,
    #[default]
    Other,
}

impl SourceDb {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceDb::Pubmed => "pubmed",
            SourceDb::Scopus => "scopus",
            SourceDb::Wos => "wos",
            SourceDb::Other => "other",
        }
    }

    /// Best-effort mapping of free-form database names ("Web of Science", "PubMed", ...).
    pub fn from_loose(name: &str) -> SourceDb {
        let n = name.trim().to_lowercase();
        if n.contains("pubmed") || n.contains("medline") {
            SourceDb::Pubmed
        } else if n.contains("scopus") {
            SourceDb::Scopus
        } else if n == "wos" || n.contains("web of science") || n.contains("web of knowledge") {
            SourceDb::Wos
        } else {
            SourceDb::Other
        }
    }
}

impl fmt::Display for SourceDb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceDb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "pubmed" => Ok(SourceDb::Pubmed),
            "scopus" => Ok(SourceDb::Scopus),
            "wos" => Ok(SourceDb::Wos),
            "other" => Ok(SourceDb::Other),
            other => Err(format!("unknown source_db `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Affiliation {
    pub institution: String,
    pub country: String,
}

/// One author of a record. Affiliations keep source order; the first one is
/// the credited institution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AuthorRef {
    #[serde(rename = "last")]
    pub last_name: String,
    #[serde(rename = "first")]
    pub first_name: String,
    #[serde(default)]
    pub affiliations: Vec<Affiliation>,
}

impl AuthorRef {
    pub fn new(last: impl Into<String>, first: impl Into<String>) -> Self {
        AuthorRef {
            last_name: last.into(),
            first_name: first.into(),
            affiliations: Vec::new(),
        }
    }

    pub fn with_affiliation(mut self, institution: &str, country: &str) -> Self {
        self.affiliations.push(Affiliation {
            institution: institution.to_string(),
            country: country.to_string(),
        });
        self
    }

    /// Identity key: `"last, first"`, case-folded with whitespace collapsed.
    pub fn identity_key(&self) -> String {
        format!(
            "{}, {}",
            normalize_ws(&self.last_name).to_lowercase(),
            normalize_ws(&self.first_name).to_lowercase()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct BiblioRecord {
    pub record_id: String,
    pub source_db: SourceDb,
    pub title: String,
    pub abstract_text: String,
    pub year: i32,
    pub month: Option<u8>,
    pub doi: Option<String>,
    pub language: Option<String>,
    pub retracted: bool,
    pub authors: Vec<AuthorRef>,
}

impl BiblioRecord {
    pub fn new(
        record_id: impl Into<String>,
        title: impl Into<String>,
        abstract_text: impl Into<String>,
        year: i32,
    ) -> Self {
        BiblioRecord {
            record_id: record_id.into(),
            title: title.into(),
            abstract_text: abstract_text.into(),
            year,
            ..Default::default()
        }
    }

    /// Title and abstract joined by exactly one space.
    pub fn corpus_text(&self) -> String {
        build_corpus_text(self)
    }
}

/// Joins the title and abstract with a single space. An empty title yields
/// the abstract unchanged.
pub fn build_corpus_text(record: &BiblioRecord) -> String {
    let title = record.title.trim();
    let abstract_text = record.abstract_text.trim();
    match (title.is_empty(), abstract_text.is_empty()) {
        (true, _) => abstract_text.to_string(),
        (false, true) => title.to_string(),
        (false, false) => format!("{title} {abstract_text}"),
    }
}

pub(crate) fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn doi_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^10\.\d+/\S+$").expect("valid regex"))
}

/// Lowercases and strips URL/`doi:` prefixes. Returns `None` when the result
/// is not of the form `10.<digits>/<suffix>`.
pub fn normalize_doi(raw: &str) -> Option<String> {
    let mut s = raw.trim().to_lowercase();
    for prefix in [
        "https://doi.org/",
        "http://doi.org/",
        "https://dx.doi.org/",
        "http://dx.doi.org/",
        "doi.org/",
        "doi:",
    ] {
        if let Some(rest) = s.strip_prefix(prefix) {
            s = rest.trim().to_string();
            break;
        }
    }
    let s = s.trim_end_matches(['.', ',', ';']).to_string();
    doi_pattern().is_match(&s).then_some(s)
}

/// Maps language names and ISO-639-2 codes onto ISO-639-1.
pub fn normalize_language(raw: &str) -> Option<String> {
    let s = raw.trim().to_lowercase();
    if s.is_empty() {
        return None;
    }
    let code = match s.as_str() {
        "eng" | "english" => "en",
        "fre" | "fra" | "french" => "fr",
        "ger" | "deu" | "german" => "de",
        "spa" | "spanish" => "es",
        "chi" | "zho" | "chinese" => "zh",
        "jpn" | "japanese" => "ja",
        "por" | "portuguese" => "pt",
        "ita" | "italian" => "it",
        "rus" | "russian" => "ru",
        "kor" | "korean" => "ko",
        "ara" | "arabic" => "ar",
        "tur" | "turkish" => "tr",
        "pol" | "polish" => "pl",
        "dut" | "nld" | "dutch" => "nl",
        "per" | "fas" | "persian" => "fa",
        other => other,
    };
    Some(code.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_text_joins_with_one_space() {
        let r = BiblioRecord::new("1", "A", "B", 2020);
        assert_eq!(build_corpus_text(&r), "A B");
        let r = BiblioRecord::new("1", "Title  \t", "Body", 2020);
        assert_eq!(build_corpus_text(&r), "Title Body");
        let r = BiblioRecord::new("1", "", "Body only", 2020);
        assert_eq!(build_corpus_text(&r), "Body only");
    }

    #[test]
    fn doi_normalization() {
        assert_eq!(
            normalize_doi("https://doi.org/10.1000/ABC.1").as_deref(),
            Some("10.1000/abc.1")
        );
        assert_eq!(normalize_doi("doi:10.5555/x").as_deref(), Some("10.5555/x"));
        assert_eq!(normalize_doi("not a doi"), None);
        assert_eq!(normalize_doi("10.abc/x"), None);
    }

    #[test]
    fn author_identity_is_case_and_space_insensitive() {
        let a = AuthorRef::new("  Smith ", "John   A");
        let b = AuthorRef::new("SMITH", "john a");
        assert_eq!(a.identity_key(), b.identity_key());
        assert_eq!(a.identity_key(), "smith, john a");
    }

    #[test]
    fn language_codes() {
        assert_eq!(normalize_language("eng").as_deref(), Some("en"));
        assert_eq!(normalize_language("English").as_deref(), Some("en"));
        assert_eq!(normalize_language("ger").as_deref(), Some("de"));
        assert_eq!(normalize_language(" "), None);
    }
}
