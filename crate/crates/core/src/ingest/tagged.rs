//! RIS and MEDLINE (nbib) tagged-line parsers.
//!
//! Only the fields the pipeline consumes are mapped. Unknown tags are ignored
//! and fields that cannot be interpreted are left empty.

use super::record::{normalize_doi, normalize_language, normalize_ws, Affiliation, AuthorRef, BiblioRecord, SourceDb};
use super::MalformedRecord;

/// Raw tag/value pairs of one record, in source order.
#[derive(Debug, Default)]
struct RawRecord {
    ordinal: usize,
    fields: Vec<(String, String)>,
}

impl RawRecord {
    fn first(&self, tags: &[&str]) -> Option<&str> {
        self.fields
            .iter()
            .find(|(t, _)| tags.contains(&t.as_str()))
            .map(|(_, v)| v.as_str())
    }

    fn all<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.fields
            .iter()
            .filter(move |(t, _)| t == tag)
            .map(|(_, v)| v.as_str())
    }
}

/// Splits an affiliation string into institution and country.
///
/// The country is the last comma-separated segment (trailing period and e-mail
/// addresses removed); the institution is the first segment naming an
/// organisation, or the first segment when none does.
pub fn split_affiliation(raw: &str) -> Affiliation {
    let cleaned: String = raw
        .split_whitespace()
        .filter(|w| !w.contains('@'))
        .collect::<Vec<_>>()
        .join(" ");
    let cleaned = cleaned.trim().trim_end_matches(['.', ';']).trim();
    let parts: Vec<&str> = cleaned.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return Affiliation::default();
    }
    const ORG_WORDS: [&str; 9] = [
        "university",
        "universit",
        "institute",
        "hospital",
        "college",
        "school",
        "center",
        "centre",
        "academy",
    ];
    let institution = parts
        .iter()
        .find(|p| {
            let lower = p.to_lowercase();
            ORG_WORDS.iter().any(|w| lower.contains(w))
        })
        .unwrap_or(&parts[0]);
    let country = if parts.len() > 1 { parts[parts.len() - 1] } else { "" };
    Affiliation {
        institution: institution.to_string(),
        country: country.to_string(),
    }
}

fn parse_year_month(raw: &str) -> (Option<i32>, Option<u8>) {
    const MONTHS: [&str; 12] = [
        "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec",
    ];
    let mut year = None;
    let mut month = None;
    for tok in raw.split(|c: char| c == '/' || c == '-' || c.is_whitespace()) {
        if tok.is_empty() {
            continue;
        }
        if year.is_none() && tok.len() == 4 && tok.chars().all(|c| c.is_ascii_digit()) {
            year = tok.parse().ok();
            continue;
        }
        if year.is_some() && month.is_none() {
            if let Ok(m) = tok.parse::<u8>() {
                if (1..=12).contains(&m) {
                    month = Some(m);
                }
            } else {
                let lower = tok.to_lowercase();
                if let Some(idx) = MONTHS.iter().position(|m| lower.starts_with(m)) {
                    month = Some(idx as u8 + 1);
                }
            }
        }
    }
    (year, month)
}

fn split_name(raw: &str) -> AuthorRef {
    let raw = normalize_ws(raw);
    match raw.split_once(',') {
        Some((last, first)) => AuthorRef::new(last.trim(), first.trim()),
        None => {
            // MEDLINE short form "Smith JA": last token is initials.
            let mut parts: Vec<&str> = raw.split(' ').collect();
            if parts.len() > 1 {
                let first = parts.pop().unwrap_or_default();
                AuthorRef::new(parts.join(" "), first)
            } else {
                AuthorRef::new(raw.clone(), "")
            }
        }
    }
}

fn strip_retraction_prefix(title: &str) -> (String, bool) {
    let t = title.trim();
    let upper = t.to_uppercase();
    for p in ["RETRACTED ARTICLE:", "RETRACTED:"] {
        if upper.starts_with(p) {
            return (t[p.len()..].trim().to_string(), true);
        }
    }
    (t.to_string(), false)
}

// ---------------------------------------------------------------------------
// RIS

fn ris_split_line(line: &str) -> Option<(String, String)> {
    // "TY  - JOUR": two-character tag, two spaces, hyphen, space (value may be empty).
    let bytes = line.as_bytes();
    if bytes.len() >= 5 && bytes[0].is_ascii_alphanumeric() && bytes[1].is_ascii_alphanumeric() && &line[2..5] == "  -"
    {
        let tag = line[..2].to_ascii_uppercase();
        let value = line[5..].trim().to_string();
        return Some((tag, value));
    }
    None
}

fn ris_records(text: &str) -> (Vec<RawRecord>, Vec<MalformedRecord>) {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let mut current: Option<RawRecord> = None;
    let mut ordinal = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r').trim_start_matches('\u{feff}');
        if line.trim().is_empty() {
            continue;
        }
        match ris_split_line(line) {
            Some((tag, value)) if tag == "TY" => {
                if let Some(open) = current.take() {
                    errors.push(MalformedRecord {
                        ordinal: open.ordinal,
                        reason: format!("missing `ER  -` before new record at line {}", lineno + 1),
                    });
                    out.push(open);
                }
                ordinal += 1;
                current = Some(RawRecord {
                    ordinal,
                    fields: vec![(tag, value)],
                });
            }
            Some((tag, _)) if tag == "ER" => match current.take() {
                Some(rec) => out.push(rec),
                None => errors.push(MalformedRecord {
                    ordinal: ordinal + 1,
                    reason: format!("`ER  -` without open record at line {}", lineno + 1),
                }),
            },
            Some((tag, value)) => match current.as_mut() {
                Some(rec) => rec.fields.push((tag, value)),
                None => errors.push(MalformedRecord {
                    ordinal: ordinal + 1,
                    reason: format!("tag `{tag}` outside a record at line {}", lineno + 1),
                }),
            },
            None => {
                // Continuation of the previous value.
                if let Some((_, value)) = current.as_mut().and_then(|r| r.fields.last_mut()) {
                    value.push(' ');
                    value.push_str(line.trim());
                }
            }
        }
    }
    if let Some(open) = current.take() {
        errors.push(MalformedRecord {
            ordinal: open.ordinal,
            reason: "unterminated record at end of file".to_string(),
        });
        out.push(open);
    }
    (out, errors)
}

fn ris_to_record(raw: &RawRecord, id_prefix: &str) -> BiblioRecord {
    let (title, retracted) = strip_retraction_prefix(raw.first(&["TI", "T1"]).unwrap_or_default());
    let abstract_text = raw.first(&["AB", "N2"]).map(normalize_ws).unwrap_or_default();
    let (year, month) = raw
        .first(&["PY", "Y1", "DA"])
        .map(parse_year_month)
        .unwrap_or((None, None));
    let month = month.or_else(|| raw.first(&["DA"]).and_then(|d| parse_year_month(d).1));

    let mut authors: Vec<AuthorRef> = Vec::new();
    let mut pending: Vec<Affiliation> = Vec::new();
    for (tag, value) in &raw.fields {
        match tag.as_str() {
            "AU" | "A1" => {
                let mut a = split_name(value);
                a.affiliations.append(&mut pending);
                authors.push(a);
            }
            "AD" => {
                let aff = split_affiliation(value);
                match authors.last_mut() {
                    Some(a) => a.affiliations.push(aff),
                    None => pending.push(aff),
                }
            }
            _ => {}
        }
    }
    if !pending.is_empty() {
        if let Some(first) = authors.first_mut() {
            first.affiliations.extend(pending);
        }
    }

    let record_id = raw
        .first(&["ID", "AN"])
        .filter(|s| !s.is_empty())
        .map(|s| format!("ris:{s}"))
        .unwrap_or_else(|| format!("{id_prefix}:{}", raw.ordinal));

    BiblioRecord {
        record_id,
        source_db: raw.first(&["DB", "DP"]).map(SourceDb::from_loose).unwrap_or_default(),
        title: normalize_ws(&title),
        abstract_text,
        year: year.unwrap_or(0),
        month,
        doi: raw.first(&["DO"]).and_then(normalize_doi),
        language: raw.first(&["LA"]).and_then(normalize_language),
        retracted: retracted || raw.all("N1").any(|n| n.to_lowercase().contains("retracted")),
        authors,
    }
}

pub(crate) fn parse_ris(text: &str, id_prefix: &str) -> (Vec<BiblioRecord>, Vec<MalformedRecord>) {
    let (raws, mut errors) = ris_records(text);
    let mut records = Vec::with_capacity(raws.len());
    for raw in &raws {
        if raw.first(&["TI", "T1", "AB", "N2"]).is_none() {
            errors.push(MalformedRecord {
                ordinal: raw.ordinal,
                reason: "record has neither title nor abstract".to_string(),
            });
        }
        records.push(ris_to_record(raw, id_prefix));
    }
    (records, errors)
}

// ---------------------------------------------------------------------------
// MEDLINE

fn medline_split_line(line: &str) -> Option<(String, String)> {
    // "PMID- 123", "TI  - Title": 4-character padded tag then "- ".
    if line.len() >= 5 && line.is_char_boundary(4) && line.as_bytes()[4] == b'-' {
        let tag = line[..4].trim_end();
        if !tag.is_empty() && tag.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit()) {
            return Some((tag.to_string(), line[5..].trim().to_string()));
        }
    }
    None
}

fn medline_records(text: &str) -> Vec<RawRecord> {
    let mut out = Vec::new();
    let mut current: Option<RawRecord> = None;
    let mut ordinal = 0;
    for line in text.lines() {
        let line = line.trim_end_matches('\r').trim_start_matches('\u{feff}');
        if line.trim().is_empty() {
            if let Some(rec) = current.take() {
                out.push(rec);
            }
            continue;
        }
        if line.starts_with(' ') || line.starts_with('\t') {
            if let Some((_, value)) = current.as_mut().and_then(|r| r.fields.last_mut()) {
                value.push(' ');
                value.push_str(line.trim());
            }
            continue;
        }
        if let Some((tag, value)) = medline_split_line(line) {
            if tag == "PMID" {
                if let Some(rec) = current.take() {
                    out.push(rec);
                }
            }
            let rec = current.get_or_insert_with(|| {
                ordinal += 1;
                RawRecord {
                    ordinal,
                    fields: Vec::new(),
                }
            });
            rec.fields.push((tag, value));
        }
    }
    if let Some(rec) = current.take() {
        out.push(rec);
    }
    out
}

fn medline_to_record(raw: &RawRecord, id_prefix: &str) -> BiblioRecord {
    let (title, retracted_title) = strip_retraction_prefix(raw.first(&["TI"]).unwrap_or_default());
    let (year, month) = raw.first(&["DP"]).map(parse_year_month).unwrap_or((None, None));

    let mut authors: Vec<AuthorRef> = Vec::new();
    let mut last_tag = "";
    for (tag, value) in &raw.fields {
        match tag.as_str() {
            "FAU" => authors.push(split_name(value)),
            // AU follows FAU for the same author; only use it when no FAU was given.
            "AU" if last_tag != "FAU" => authors.push(split_name(value)),
            "AD" => {
                if let Some(a) = authors.last_mut() {
                    a.affiliations.push(split_affiliation(value));
                }
            }
            _ => {}
        }
        if tag != "AD" {
            last_tag = tag.as_str();
        }
    }

    let doi = raw
        .fields
        .iter()
        .filter(|(t, _)| t == "AID" || t == "LID")
        .filter_map(|(_, v)| v.strip_suffix("[doi]").map(str::trim))
        .find_map(normalize_doi);

    let record_id = raw
        .first(&["PMID"])
        .filter(|s| !s.is_empty())
        .map(|s| format!("pmid:{s}"))
        .unwrap_or_else(|| format!("{id_prefix}:{}", raw.ordinal));

    let retracted = retracted_title || raw.all("PT").any(|pt| pt.eq_ignore_ascii_case("Retracted Publication"));

    BiblioRecord {
        record_id,
        source_db: SourceDb::Pubmed,
        title: normalize_ws(&title),
        abstract_text: raw.first(&["AB"]).map(normalize_ws).unwrap_or_default(),
        year: year.unwrap_or(0),
        month,
        doi,
        language: raw.first(&["LA"]).and_then(normalize_language),
        retracted,
        authors,
    }
}

pub(crate) fn parse_medline(text: &str, id_prefix: &str) -> (Vec<BiblioRecord>, Vec<MalformedRecord>) {
    let raws = medline_records(text);
    let mut errors = Vec::new();
    let mut records = Vec::with_capacity(raws.len());
    for raw in &raws {
        if raw.first(&["PMID"]).is_none() {
            errors.push(MalformedRecord {
                ordinal: raw.ordinal,
                reason: "record without PMID".to_string(),
            });
        }
        records.push(medline_to_record(raw, id_prefix));
    }
    (records, errors)
}
