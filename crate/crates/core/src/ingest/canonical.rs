//! Canonical corpus CSV shared by every downstream stage.
//!
//! Header: `record_id,source_db,title,abstract,year,month,doi,language,retracted,authors_json`

use std::io::{Read, Write};

use super::record::{normalize_language, AuthorRef, BiblioRecord, SourceDb};
use super::{IngestError, MalformedRecord};

pub const CANONICAL_HEADER: [&str; 10] = [
    "record_id",
    "source_db",
    "title",
    "abstract",
    "year",
    "month",
    "doi",
    "language",
    "retracted",
    "authors_json",
];

pub fn write_corpus_csv<W: Write>(records: &[BiblioRecord], writer: W) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(CANONICAL_HEADER)?;
    for r in records {
        let authors = serde_json::to_string(&r.authors).expect("authors serialize");
        w.write_record([
            r.record_id.as_str(),
            r.source_db.as_str(),
            r.title.as_str(),
            r.abstract_text.as_str(),
            &r.year.to_string(),
            &r.month.map(|m| m.to_string()).unwrap_or_default(),
            r.doi.as_deref().unwrap_or(""),
            r.language.as_deref().unwrap_or(""),
            if r.retracted { "true" } else { "false" },
            &authors,
        ])?;
    }
    w.flush().map_err(|e| IngestError::Io(e.to_string()))?;
    Ok(())
}

struct Columns {
    idx: [Option<usize>; 10],
}

impl Columns {
    fn from_header(header: &csv::StringRecord) -> Self {
        let mut idx = [None; 10];
        for (i, name) in header.iter().enumerate() {
            if let Some(pos) = CANONICAL_HEADER.iter().position(|h| *h == name.trim()) {
                idx[pos] = Some(i);
            }
        }
        Columns { idx }
    }

    fn get<'a>(&self, row: &'a csv::StringRecord, col: usize) -> &'a str {
        self.idx[col].and_then(|i| row.get(i)).unwrap_or("")
    }
}

/// Reads a canonical corpus CSV. Rows that cannot be decoded at all are
/// reported and skipped; individual bad fields are reported and left empty.
pub fn read_corpus_csv<R: Read>(reader: R) -> Result<(Vec<BiblioRecord>, Vec<MalformedRecord>), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| IngestError::Io(e.to_string()))?.clone();
    let cols = Columns::from_header(&header);
    if cols.idx[0].is_none() {
        return Err(IngestError::MissingColumn("record_id".to_string()));
    }

    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut raw = csv::StringRecord::new();
    let mut ordinal = 0;
    loop {
        ordinal += 1;
        match rdr.read_record(&mut raw) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                errors.push(MalformedRecord {
                    ordinal,
                    reason: e.to_string(),
                });
                continue;
            }
        }
        let mut bad = |reason: String| {
            errors.push(MalformedRecord { ordinal, reason });
        };
        let record_id = cols.get(&raw, 0).to_string();
        if record_id.trim().is_empty() {
            bad("empty record_id".to_string());
            continue;
        }
        let source_db = match cols.get(&raw, 1) {
            "" => SourceDb::Other,
            s => s.parse().unwrap_or_else(|_| SourceDb::from_loose(s)),
        };
        let year = match cols.get(&raw, 4).trim() {
            "" => 0,
            s => s.parse().unwrap_or_else(|_| {
                bad(format!("unparseable year `{s}`"));
                0
            }),
        };
        let month = match cols.get(&raw, 5).trim() {
            "" => None,
            s => match s.parse::<u8>() {
                Ok(m) if (1..=12).contains(&m) => Some(m),
                _ => {
                    bad(format!("unparseable month `{s}`"));
                    None
                }
            },
        };
        let doi = match cols.get(&raw, 6).trim() {
            "" => None,
            s => {
                let n = super::record::normalize_doi(s);
                if n.is_none() {
                    bad(format!("invalid doi `{s}`"));
                }
                n
            }
        };
        let retracted = match cols.get(&raw, 8).trim().to_lowercase().as_str() {
            "true" | "1" | "yes" => true,
            "" | "false" | "0" | "no" => false,
            s => {
                bad(format!("unparseable retracted flag `{s}`"));
                false
            }
        };
        let authors: Vec<AuthorRef> = match cols.get(&raw, 9).trim() {
            "" => Vec::new(),
            s => serde_json::from_str(s).unwrap_or_else(|e| {
                bad(format!("invalid authors_json: {e}"));
                Vec::new()
            }),
        };
        records.push(BiblioRecord {
            record_id,
            source_db,
            title: cols.get(&raw, 2).to_string(),
            abstract_text: cols.get(&raw, 3).to_string(),
            year,
            month,
            doi,
            language: normalize_language(cols.get(&raw, 7)),
            retracted,
            authors,
        });
    }
    Ok((records, errors))
}
