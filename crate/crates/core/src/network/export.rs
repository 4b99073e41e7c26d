//! GEXF 1.3, GraphML and edge-list writers, plus readers for the two XML
//! formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{CollabGraph, CommunityPartition, EntityKind, NetworkError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Gexf,
    Graphml,
    EdgeCsv,
}

impl GraphFormat {
    pub fn extension(self) -> &'static str {
        match self {
            GraphFormat::Gexf => "gexf",
            GraphFormat::Graphml => "graphml",
            GraphFormat::EdgeCsv => "csv",
        }
    }
}

impl FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gexf" => Ok(GraphFormat::Gexf),
            "graphml" => Ok(GraphFormat::Graphml),
            "edge_csv" | "csv" => Ok(GraphFormat::EdgeCsv),
            other => Err(format!("unknown graph format `{other}`")),
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn node_ids(g: &CollabGraph) -> BTreeMap<&str, String> {
    g.nodes
        .keys()
        .enumerate()
        .map(|(i, k)| (k.as_str(), format!("n{i}")))
        .collect()
}

fn gexf(g: &CollabGraph, partition: Option<&CommunityPartition>) -> String {
    let ids = node_ids(g);
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<gexf xmlns=\"http://gexf.net/1.3\" version=\"1.3\">\n");
    let _ = writeln!(s, "  <meta>\n    <description>{}</description>\n  </meta>", g.kind);
    s.push_str("  <graph mode=\"static\" defaultedgetype=\"undirected\">\n");
    s.push_str("    <attributes class=\"node\">\n");
    s.push_str("      <attribute id=\"publications\" title=\"publications\" type=\"integer\"/>\n");
    s.push_str("      <attribute id=\"community\" title=\"community\" type=\"integer\"/>\n");
    s.push_str("    </attributes>\n    <nodes>\n");
    for (key, count) in &g.nodes {
        let _ = write!(
            s,
            "      <node id=\"{}\" label=\"{}\">\n        <attvalues>\n          <attvalue for=\"publications\" value=\"{count}\"/>\n",
            ids[key.as_str()],
            escape(key)
        );
        if let Some(c) = partition.and_then(|p| p.assignment.get(key)) {
            let _ = writeln!(s, "          <attvalue for=\"community\" value=\"{c}\"/>");
        }
        s.push_str("        </attvalues>\n      </node>\n");
    }
    s.push_str("    </nodes>\n    <edges>\n");
    for (i, ((a, b), w)) in g.edges.iter().enumerate() {
        let _ = writeln!(
            s,
            "      <edge id=\"e{i}\" source=\"{}\" target=\"{}\" weight=\"{w}\"/>",
            ids[a.as_str()],
            ids[b.as_str()]
        );
    }
    s.push_str("    </edges>\n  </graph>\n</gexf>\n");
    s
}

fn graphml(g: &CollabGraph, partition: Option<&CommunityPartition>) -> String {
    let ids = node_ids(g);
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"kind\" for=\"graph\" attr.name=\"kind\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"publications\" for=\"node\" attr.name=\"publications\" attr.type=\"int\"/>\n");
    s.push_str("  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n");
    s.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n");
    s.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    let _ = writeln!(s, "    <data key=\"kind\">{}</data>", g.kind);
    for (key, count) in &g.nodes {
        let _ = write!(
            s,
            "    <node id=\"{}\">\n      <data key=\"label\">{}</data>\n      <data key=\"publications\">{count}</data>\n",
            ids[key.as_str()],
            escape(key)
        );
        if let Some(c) = partition.and_then(|p| p.assignment.get(key)) {
            let _ = writeln!(s, "      <data key=\"community\">{c}</data>");
        }
        s.push_str("    </node>\n");
    }
    for (i, ((a, b), w)) in g.edges.iter().enumerate() {
        let _ = writeln!(
            s,
            "    <edge id=\"e{i}\" source=\"{}\" target=\"{}\">\n      <data key=\"weight\">{w}</data>\n    </edge>",
            ids[a.as_str()],
            ids[b.as_str()]
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

fn edge_csv(g: &CollabGraph) -> Result<String, NetworkError> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| NetworkError::Format(e.to_string());
    out.write_record(["source", "target", "weight"]).map_err(fail)?;
    for ((a, b), w) in &g.edges {
        out.write_record([a.as_str(), b.as_str(), &w.to_string()])
            .map_err(fail)?;
    }
    let bytes = out.into_inner().map_err(|e| NetworkError::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| NetworkError::Format(e.to_string()))
}

/// Serializes a graph, with community ids when a partition is given.
pub fn render_graph(
    g: &CollabGraph,
    partition: Option<&CommunityPartition>,
    format: GraphFormat,
) -> Result<String, NetworkError> {
    match format {
        GraphFormat::Gexf => Ok(gexf(g, partition)),
        GraphFormat::Graphml => Ok(graphml(g, partition)),
        GraphFormat::EdgeCsv => edge_csv(g),
    }
}

pub fn export_graph(
    g: &CollabGraph,
    partition: Option<&CommunityPartition>,
    path: &Path,
    format: GraphFormat,
) -> Result<(), NetworkError> {
    std::fs::write(path, render_graph(g, partition, format)?)?;
    Ok(())
}

/// A graph read back from an export, with any community ids it carried.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedGraph {
    pub graph: CollabGraph,
    pub communities: BTreeMap<String, usize>,
}

fn bad(msg: impl Into<String>) -> NetworkError {
    NetworkError::Format(msg.into())
}

fn parse_num<T: FromStr>(s: Option<&str>, what: &str) -> Result<T, NetworkError> {
    s.and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| bad(format!("missing or invalid {what}")))
}

fn insert_edge(
    g: &mut CollabGraph,
    labels: &BTreeMap<String, String>,
    source: Option<&str>,
    target: Option<&str>,
    weight: usize,
) -> Result<(), NetworkError> {
    let lookup = |id: Option<&str>| {
        id.and_then(|i| labels.get(i))
            .cloned()
            .ok_or_else(|| bad("edge endpoint is not a node"))
    };
    let (a, b) = (lookup(source)?, lookup(target)?);
    if a == b {
        return Err(bad("self-edge"));
    }
    let key = if a < b { (a, b) } else { (b, a) };
    g.edges.insert(key, weight);
    Ok(())
}

fn kind_from(text: Option<&str>) -> Result<EntityKind, NetworkError> {
    text.unwrap_or_default().parse().map_err(bad)
}

pub fn parse_gexf(xml: &str) -> Result<ImportedGraph, NetworkError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| bad(e.to_string()))?;
    let kind = kind_from(
        doc.descendants()
            .find(|n| n.has_tag_name("description"))
            .and_then(|n| n.text()),
    )?;
    let mut graph = CollabGraph::empty(kind);
    let mut communities = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for node in doc.descendants().filter(|n| n.has_tag_name("node")) {
        let id = node.attribute("id").ok_or_else(|| bad("node without id"))?;
        let label = node
            .attribute("label")
            .ok_or_else(|| bad("node without label"))?
            .to_string();
        let value = |key: &str| {
            node.descendants()
                .find(|a| a.has_tag_name("attvalue") && a.attribute("for") == Some(key))
                .and_then(|a| a.attribute("value"))
        };
        graph
            .nodes
            .insert(label.clone(), parse_num(value("publications"), "publications")?);
        if let Some(c) = value("community") {
            communities.insert(label.clone(), parse_num(Some(c), "community")?);
        }
        labels.insert(id.to_string(), label);
    }
    for edge in doc.descendants().filter(|n| n.has_tag_name("edge")) {
        let w = parse_num(edge.attribute("weight"), "edge weight")?;
        insert_edge(
            &mut graph,
            &labels,
            edge.attribute("source"),
            edge.attribute("target"),
            w,
        )?;
    }
    Ok(ImportedGraph { graph, communities })
}

pub fn parse_graphml(xml: &str) -> Result<ImportedGraph, NetworkError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| bad(e.to_string()))?;
    let data = |n: roxmltree::Node<'_, '_>, key: &str| {
        n.children()
            .find(|d| d.has_tag_name("data") && d.attribute("key") == Some(key))
            .map(|d| d.text().unwrap_or_default().to_string())
    };
    let g = doc
        .descendants()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| bad("no graph element"))?;
    let mut graph = CollabGraph::empty(kind_from(data(g, "kind").as_deref())?);
    let mut communities = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for node in g.children().filter(|n| n.has_tag_name("node")) {
        let id = node.attribute("id").ok_or_else(|| bad("node without id"))?;
        let label = data(node, "label").ok_or_else(|| bad("node without label"))?;
        graph.nodes.insert(
            label.clone(),
            parse_num(data(node, "publications").as_deref(), "publications")?,
        );
        if let Some(c) = data(node, "community") {
            communities.insert(label.clone(), parse_num(Some(&c), "community")?);
        }
        labels.insert(id.to_string(), label);
    }
    for edge in g.children().filter(|n| n.has_tag_name("edge")) {
        let w = parse_num(data(edge, "weight").as_deref(), "edge weight")?;
        insert_edge(
            &mut graph,
            &labels,
            edge.attribute("source"),
            edge.attribute("target"),
            w,
        )?;
    }
    Ok(ImportedGraph { graph, communities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::detect_communities;

    fn sample() -> CollabGraph {
        let mut g = CollabGraph::empty(EntityKind::Institution);
        g.nodes.insert("r&d lab <east>".into(), 4);
        g.nodes.insert("uni \"west\"".into(), 2);
        g.edges.insert(("r&d lab <east>".into(), "uni \"west\"".into()), 2);
        g
    }

    #[test]
    fn xml_round_trips_with_escaping() {
        let g = sample();
        let p = detect_communities(&g).unwrap();
        for (format, parse) in [
            (
                GraphFormat::Gexf,
                parse_gexf as fn(&str) -> Result<ImportedGraph, NetworkError>,
            ),
            (GraphFormat::Graphml, parse_graphml),
        ] {
            let xml = render_graph(&g, Some(&p), format).unwrap();
            assert!(xml.contains("r&amp;d lab &lt;east&gt;"));
            let back = parse(&xml).unwrap();
            assert_eq!(back.graph, g);
            assert_eq!(back.communities, p.assignment);
        }
    }

    #[test]
    fn empty_graph_is_valid() {
        let g = CollabGraph::empty(EntityKind::Country);
        for format in [GraphFormat::Gexf, GraphFormat::Graphml] {
            let xml = render_graph(&g, None, format).unwrap();
            let back = match format {
                GraphFormat::Gexf => parse_gexf(&xml),
                _ => parse_graphml(&xml),
            }
            .unwrap();
            assert_eq!(back.graph, g);
        }
    }

    #[test]
    fn edge_list() {
        let csv = render_graph(&sample(), None, GraphFormat::EdgeCsv).unwrap();
        assert_eq!(csv, "source,target,weight\nr&d lab <east>,\"uni \"\"west\"\"\",2\n");
    }
}
