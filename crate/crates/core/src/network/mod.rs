//! Collaboration networks of countries, institutions and authors.

mod export;
mod louvain;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::ingest::BiblioRecord;
use crate::topics::TopicAssignment;

pub use export::{export_graph, parse_gexf, parse_graphml, render_graph, GraphFormat, ImportedGraph};
pub use louvain::{detect_communities, modularity, CommunityPartition};

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("topic {0} has no documents in the assignment")]
    UnknownTopic(i64),
    #[error("malformed graph file: {0}")]
    Format(String),
    #[error("alias map line {line}: {reason}")]
    AliasMap { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    Country,
    Institution,
    Author,
}

impl EntityKind {
    pub const ALL: [EntityKind; 3] = [EntityKind::Country, EntityKind::Institution, EntityKind::Author];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Country => "country",
            EntityKind::Institution => "institution",
            EntityKind::Author => "author",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "country" => Ok(EntityKind::Country),
            "institution" => Ok(EntityKind::Institution),
            "author" => Ok(EntityKind::Author),
            other => Err(format!("unknown entity kind `{other}`")),
        }
    }
}

fn canonical(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Optional mapping of variant entity names onto one canonical name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasMap {
    map: BTreeMap<String, String>,
}

impl AliasMap {
    /// Tab-separated `variant<TAB>canonical` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, NetworkError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (from, to) = line.split_once('\t').ok_or_else(|| NetworkError::AliasMap {
                line: i + 1,
                reason: "expected `variant<TAB>canonical`".into(),
            })?;
            let (from, to) = (canonical(from), canonical(to));
            if from.is_empty() || to.is_empty() {
                return Err(NetworkError::AliasMap {
                    line: i + 1,
                    reason: "empty name".into(),
                });
            }
            map.insert(from, to);
        }
        Ok(AliasMap { map })
    }

    pub fn resolve(&self, key: String) -> String {
        self.map.get(&key).cloned().unwrap_or(key)
    }
}

/// Distinct entities of one kind credited to a record. Institutions use each
/// author's first affiliation only; countries use every affiliation.
pub fn document_entities(record: &BiblioRecord, kind: EntityKind, aliases: Option<&AliasMap>) -> BTreeSet<String> {
    let raw: Vec<String> = match kind {
        EntityKind::Author => record.authors.iter().map(|a| a.identity_key()).collect(),
        EntityKind::Institution => record
            .authors
            .iter()
            .filter_map(|a| a.affiliations.first())
            .map(|af| canonical(&af.institution))
            .collect(),
        EntityKind::Country => record
            .authors
            .iter()
            .flat_map(|a| a.affiliations.iter())
            .map(|af| canonical(&af.country))
            .collect(),
    };
    raw.into_iter()
        .filter(|k| !k.is_empty() && k != ",")
        .map(|k| match aliases {
            Some(a) => a.resolve(k),
            None => k,
        })
        .collect()
}

/// Publication count per entity, each entity credited once per document.
pub fn count_entities(
    records: &[BiblioRecord],
    kind: EntityKind,
    aliases: Option<&AliasMap>,
) -> BTreeMap<String, usize> {
    build_graph(records, kind, aliases).nodes
}

/// Weighted co-publication graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollabGraph {
    pub kind: EntityKind,
    pub nodes: BTreeMap<String, usize>,
    /// Keys are ordered pairs `(a, b)` with `a < b`.
    pub edges: BTreeMap<(String, String), usize>,
    pub doc_basis: Vec<String>,
}

impl CollabGraph {
    pub fn empty(kind: EntityKind) -> Self {
        CollabGraph {
            kind,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            doc_basis: Vec::new(),
        }
    }

    pub fn edge_weight(&self, a: &str, b: &str) -> usize {
        let key = if a < b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        self.edges.get(&key).copied().unwrap_or(0)
    }

    /// Entities sorted by count descending, then name.
    pub fn ranking(&self) -> Vec<(&str, usize)> {
        let mut r: Vec<(&str, usize)> = self.nodes.iter().map(|(k, c)| (k.as_str(), *c)).collect();
        r.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        r
    }
}

pub fn build_graph(records: &[BiblioRecord], kind: EntityKind, aliases: Option<&AliasMap>) -> CollabGraph {
    let mut g = CollabGraph::empty(kind);
    for r in records {
        let ents = document_entities(r, kind, aliases);
        if ents.is_empty() {
            log::debug!("record `{}` has no {kind} entities; skipped", r.record_id);
            continue;
        }
        g.doc_basis.push(r.record_id.clone());
        let ents: Vec<&String> = ents.iter().collect();
        for (i, a) in ents.iter().enumerate() {
            *g.nodes.entry((*a).clone()).or_insert(0) += 1;
            for b in &ents[i + 1..] {
                *g.edges.entry(((*a).clone(), (*b).clone())).or_insert(0) += 1;
            }
        }
    }
    g
}

/// Drops nodes with fewer than `min_publications` and their edges.
pub fn filter_graph(g: &CollabGraph, min_publications: usize) -> CollabGraph {
    let nodes: BTreeMap<String, usize> = g
        .nodes
        .iter()
        .filter(|(_, c)| **c >= min_publications)
        .map(|(k, c)| (k.clone(), *c))
        .collect();
    let edges = g
        .edges
        .iter()
        .filter(|((a, b), _)| nodes.contains_key(a) && nodes.contains_key(b))
        .map(|(k, w)| (k.clone(), *w))
        .collect();
    CollabGraph {
        kind: g.kind,
        nodes,
        edges,
        doc_basis: g.doc_basis.clone(),
    }
}

/// One graph per requested topic, built from that topic's documents only.
pub fn topicwise(
    records: &[BiblioRecord],
    assignment: &TopicAssignment,
    topic_ids: &[i64],
    kind: EntityKind,
    aliases: Option<&AliasMap>,
) -> Result<BTreeMap<i64, CollabGraph>, NetworkError> {
    let mut out = BTreeMap::new();
    for &t in topic_ids {
        let subset: Vec<BiblioRecord> = records
            .iter()
            .filter(|r| assignment.labels.get(&r.record_id) == Some(&t))
            .cloned()
            .collect();
        if !assignment.labels.values().any(|l| *l == t) {
            return Err(NetworkError::UnknownTopic(t));
        }
        out.insert(t, build_graph(&subset, kind, aliases));
    }
    Ok(out)
}

/// `entity,count`, most published first.
pub fn write_rankings_csv<W: Write>(g: &CollabGraph, w: W) -> Result<(), NetworkError> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    let fail = |e: csv::Error| NetworkError::Format(e.to_string());
    out.write_record(["entity", "count"]).map_err(fail)?;
    for (e, c) in g.ranking() {
        out.write_record([e, &c.to_string()]).map_err(fail)?;
    }
    out.flush()?;
    Ok(())
}

/// `entity,topic_id,count` for every entity present in a topic graph.
pub fn write_topic_counts_csv<W: Write>(per_topic: &BTreeMap<i64, CollabGraph>, w: W) -> Result<(), NetworkError> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    let fail = |e: csv::Error| NetworkError::Format(e.to_string());
    out.write_record(["entity", "topic_id", "count"]).map_err(fail)?;
    for (t, g) in per_topic {
        for (e, c) in g.ranking() {
            out.write_record([e, &t.to_string(), &c.to_string()]).map_err(fail)?;
        }
    }
    out.flush()?;
    Ok(())
}
