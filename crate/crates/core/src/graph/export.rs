//! GraphML, Graphviz dot and edge-list CSV writers, plus readers for the two
//! lossless formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use quick_xml::events::Event;
use quick_xml::Reader;

use super::{EdgeWeight, InteractionGraph, NodeRole};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ExportError {
    #[error("unknown export format `{0}` (expected graphml, dot or edges_csv)")]
    UnknownFormat(String),
    #[error("no layout position for node `{0}`")]
    MissingPosition(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    GraphMl,
    Dot,
    EdgesCsv,
}

impl ExportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::GraphMl => "graphml",
            ExportFormat::Dot => "dot",
            ExportFormat::EdgesCsv => "edges.csv",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "graphml" => Ok(ExportFormat::GraphMl),
            "dot" => Ok(ExportFormat::Dot),
            "edges_csv" | "csv" => Ok(ExportFormat::EdgesCsv),
            other => Err(ExportError::UnknownFormat(other.to_string())),
        }
    }
}

fn xml_escape(s: &str) -> String {
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

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Serializes the graph. Output bytes depend only on the graph, roles and
/// positions: nodes and edges are written in sorted id order.
pub fn export_graph(
    g: &InteractionGraph,
    roles: &BTreeMap<String, NodeRole>,
    positions: Option<&BTreeMap<String, [f64; 2]>>,
    format: ExportFormat,
) -> Result<Vec<u8>, ExportError> {
    if let Some(pos) = positions {
        if let Some(missing) = g.nodes().iter().find(|n| !pos.contains_key(*n)) {
            return Err(ExportError::MissingPosition(missing.clone()));
        }
    }
    let role_of = |id: &str| roles.get(id).map(NodeRole::as_str).unwrap_or("");
    let mut out = String::new();
    match format {
        ExportFormat::GraphMl => {
            out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
            out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
            out.push_str(
                "  <key id=\"role\" for=\"node\" attr.name=\"role\" attr.type=\"string\"/>\n",
            );
            out.push_str("  <key id=\"x\" for=\"node\" attr.name=\"x\" attr.type=\"double\"/>\n");
            out.push_str("  <key id=\"y\" for=\"node\" attr.name=\"y\" attr.type=\"double\"/>\n");
            out.push_str(
                "  <key id=\"mentions\" for=\"edge\" attr.name=\"mentions\" attr.type=\"int\"/>\n",
            );
            out.push_str(
                "  <key id=\"retweets\" for=\"edge\" attr.name=\"retweets\" attr.type=\"int\"/>\n",
            );
            out.push_str(
                "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n",
            );
            out.push_str("  <graph id=\"can\" edgedefault=\"directed\">\n");
            for id in g.nodes() {
                let _ = write!(out, "    <node id=\"{}\">", xml_escape(id));
                let _ = write!(out, "<data key=\"role\">{}</data>", role_of(id));
                if let Some(pos) = positions {
                    let [x, y] = pos[id];
                    let _ = write!(
                        out,
                        "<data key=\"x\">{x:?}</data><data key=\"y\">{y:?}</data>"
                    );
                }
                out.push_str("</node>\n");
            }
            for (i, (s, t, w)) in g.edges().enumerate() {
                let _ = writeln!(
                    out,
                    "    <edge id=\"e{i}\" source=\"{}\" target=\"{}\"><data key=\"mentions\">{}</data><data key=\"retweets\">{}</data><data key=\"weight\">{}</data></edge>",
                    xml_escape(&g.nodes()[s]),
                    xml_escape(&g.nodes()[t]),
                    w.mention_count,
                    w.retweet_count,
                    w.total()
                );
            }
            out.push_str("  </graph>\n</graphml>\n");
        }
        ExportFormat::Dot => {
            out.push_str("digraph can {\n");
            for id in g.nodes() {
                let _ = write!(out, "  {} [role=\"{}\"", dot_quote(id), role_of(id));
                if let Some(pos) = positions {
                    let [x, y] = pos[id];
                    let _ = write!(out, ", pos=\"{x:?},{y:?}!\"");
                }
                out.push_str("];\n");
            }
            for (s, t, w) in g.edges() {
                let _ = writeln!(
                    out,
                    "  {} -> {} [weight={}, mentions={}, retweets={}];",
                    dot_quote(&g.nodes()[s]),
                    dot_quote(&g.nodes()[t]),
                    w.total(),
                    w.mention_count,
                    w.retweet_count
                );
            }
            out.push_str("}\n");
        }
        ExportFormat::EdgesCsv => {
            // nodes without edges are rows with an empty target
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| ExportError::Malformed(e.to_string());
            w.write_record(["source", "target", "mentions", "retweets"])
                .map_err(csv_err)?;
            let (indeg, outdeg) = g.degrees();
            for (s, t, wt) in g.edges() {
                w.write_record([
                    g.nodes()[s].as_str(),
                    g.nodes()[t].as_str(),
                    &wt.mention_count.to_string(),
                    &wt.retweet_count.to_string(),
                ])
                .map_err(csv_err)?;
            }
            for (i, id) in g.nodes().iter().enumerate() {
                if indeg[i] == 0 && outdeg[i] == 0 {
                    w.write_record([id.as_str(), "", "0", "0"])
                        .map_err(csv_err)?;
                }
            }
            return w
                .into_inner()
                .map_err(|e| ExportError::Malformed(e.to_string()));
        }
    }
    Ok(out.into_bytes())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedGraph {
    pub graph: InteractionGraph,
    pub roles: BTreeMap<String, NodeRole>,
    pub positions: Option<BTreeMap<String, [f64; 2]>>,
}

pub fn parse_edges_csv(bytes: &[u8]) -> Result<InteractionGraph, ExportError> {
    let mut reader = csv::Reader::from_reader(bytes);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let bad = |e: &dyn std::fmt::Display| ExportError::Malformed(e.to_string());
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(&e))?;
        if rec.len() != 4 {
            return Err(ExportError::Malformed(format!(
                "expected 4 columns, found {}",
                rec.len()
            )));
        }
        let num = |i: usize| rec[i].parse::<u64>().map_err(|e| bad(&e));
        let (source, target) = (rec[0].to_string(), rec[1].to_string());
        if target.is_empty() {
            nodes.push(source);
        } else {
            edges.push((
                source,
                target,
                EdgeWeight {
                    mention_count: num(2)?,
                    retweet_count: num(3)?,
                },
            ));
        }
    }
    Ok(InteractionGraph::from_parts(
        nodes.iter().map(String::as_str),
        edges.iter().map(|(s, t, w)| (s.as_str(), t.as_str(), *w)),
    ))
}

#[derive(Default)]
struct PendingNode {
    id: String,
    role: Option<String>,
    x: Option<f64>,
    y: Option<f64>,
}

#[derive(Default)]
struct PendingEdge {
    source: String,
    target: String,
    mentions: u64,
    retweets: u64,
}

/// Reads GraphML written by [`export_graph`] (keys `role`, `x`, `y`,
/// `mentions`, `retweets`).
pub fn parse_graphml(bytes: &[u8]) -> Result<ParsedGraph, ExportError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ExportError::Malformed(e.to_string()))?;
    let mut reader = Reader::from_str(text);
    let bad = |e: &dyn std::fmt::Display| ExportError::Malformed(e.to_string());

    let mut nodes: Vec<PendingNode> = Vec::new();
    let mut edges: Vec<PendingEdge> = Vec::new();
    let mut in_node = false;
    let mut in_edge = false;
    let mut data_key: Option<String> = None;

    loop {
        let event = reader.read_event().map_err(|e| bad(&e))?;
        match event {
            Event::Eof => break,
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                let mut attrs = BTreeMap::new();
                for a in e.attributes() {
                    let a = a.map_err(|e| bad(&e))?;
                    let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
                    let value = a.unescape_value().map_err(|e| bad(&e))?.into_owned();
                    attrs.insert(key, value);
                }
                let attr = |k: &str| {
                    attrs
                        .get(k)
                        .cloned()
                        .ok_or_else(|| ExportError::Malformed(format!("missing attribute `{k}`")))
                };
                match e.name().as_ref() {
                    b"node" => {
                        nodes.push(PendingNode {
                            id: attr("id")?,
                            ..Default::default()
                        });
                        in_node = !empty;
                    }
                    b"edge" => {
                        edges.push(PendingEdge {
                            source: attr("source")?,
                            target: attr("target")?,
                            ..Default::default()
                        });
                        in_edge = !empty;
                    }
                    b"data" if !empty => data_key = Some(attr("key")?),
                    _ => {}
                }
            }
            Event::Text(t) => {
                let Some(key) = data_key.as_deref() else {
                    continue;
                };
                let value = t.unescape().map_err(|e| bad(&e))?.into_owned();
                let float = |v: &str| v.trim().parse::<f64>().map_err(|e| bad(&e));
                let int = |v: &str| v.trim().parse::<u64>().map_err(|e| bad(&e));
                if in_node {
                    let n = nodes.last_mut().expect("inside a node");
                    match key {
                        "role" => n.role = Some(value),
                        "x" => n.x = Some(float(&value)?),
                        "y" => n.y = Some(float(&value)?),
                        _ => {}
                    }
                } else if in_edge {
                    let e = edges.last_mut().expect("inside an edge");
                    match key {
                        "mentions" => e.mentions = int(&value)?,
                        "retweets" => e.retweets = int(&value)?,
                        _ => {}
                    }
                }
            }
            Event::End(ref e) => match e.name().as_ref() {
                b"node" => in_node = false,
                b"edge" => in_edge = false,
                b"data" => data_key = None,
                _ => {}
            },
            _ => {}
        }
    }

    let graph = InteractionGraph::from_parts(
        nodes.iter().map(|n| n.id.as_str()),
        edges.iter().map(|e| {
            (
                e.source.as_str(),
                e.target.as_str(),
                EdgeWeight {
                    mention_count: e.mentions,
                    retweet_count: e.retweets,
                },
            )
        }),
    );
    let mut roles = BTreeMap::new();
    for n in &nodes {
        if let Some(r) = n.role.as_deref().filter(|r| !r.is_empty()) {
            let role = NodeRole::parse(r)
                .ok_or_else(|| ExportError::Malformed(format!("unknown role `{r}`")))?;
            roles.insert(n.id.clone(), role);
        }
    }
    let positions = if !nodes.is_empty() && nodes.iter().all(|n| n.x.is_some() && n.y.is_some()) {
        Some(
            nodes
                .iter()
                .map(|n| (n.id.clone(), [n.x.unwrap(), n.y.unwrap()]))
                .collect(),
        )
    } else {
        None
    };
    Ok(ParsedGraph {
        graph,
        roles,
        positions,
    })
}
