//! Text formats: canonical edge lists, partition tables, GraphML and DOT export.
//!
//! Edge list layout (UTF-8, LF line endings):
//!
//! ```text
//! # commgrow edge list
//! # version: 0.1.0
//! # nodes: 3
//! # params: n=3 m=2 c=1 p_t=1 p_c=0 seed=7
//! 0	1
//! 0	2
//! 1	2
//! ```
//!
//! Body rows are `u<TAB>v` with `u < v`, sorted by `(u, v)`. Every header line starts
//! with `#`; `nodes` preserves isolated trailing nodes and `params` is present only
//! for generated graphs. Partition tables are `node_id<TAB>group_id`, one row per
//! node in id order.

#![allow(clippy::tabs_in_doc_comments)]

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::generator::GenParams;
use crate::graph::{Graph, NodeId, Partition, PartitionKind};

pub const EDGE_LIST_MAGIC: &str = "# commgrow edge list";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed row {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: u64 },
    #[error("line {line}: duplicate edge {u}-{v}")]
    Duplicate { line: usize, u: u64, v: u64 },
    #[error("line {line}: bad header: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: node {node} listed twice")]
    DuplicateNode { line: usize, node: u64 },
    #[error("partition is missing node {0}")]
    MissingNode(usize),
}

/// Result of reading an edge list.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeListDocument {
    pub graph: Graph,
    /// Generation parameters recorded in the header, if any.
    pub params: Option<GenParams>,
    /// Original id of each node when the input ids were not dense and had to be
    /// compacted; `None` when ids were used as-is.
    pub remap: Option<Vec<u64>>,
    pub warnings: Vec<String>,
}

/// Canonical edge list for `g`. Identical graphs give identical bytes.
pub fn write_edge_list(g: &Graph, params: Option<&GenParams>) -> String {
    let mut out = String::with_capacity(16 * g.edge_count() + 128);
    out.push_str(EDGE_LIST_MAGIC);
    out.push('\n');
    let _ = writeln!(out, "# version: {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# nodes: {}", g.node_count());
    if let Some(p) = params {
        let _ = writeln!(out, "# params: {p}");
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u}\t{v}");
    }
    out
}

/// Parses an edge list. Rows may list endpoints in either order and may be
/// separated by tabs or spaces.
pub fn read_edge_list(text: &str) -> Result<EdgeListDocument, ParseError> {
    let mut declared_nodes: Option<u64> = None;
    let mut params = None;
    let mut rows: Vec<(u64, u64)> = Vec::new();
    let mut seen: BTreeMap<(u64, u64), usize> = BTreeMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        if let Some(comment) = row.strip_prefix('#') {
            let Some((key, value)) = comment.split_once(':') else {
                continue;
            };
            let header = |reason: String| ParseError::Header { line, reason };
            match key.trim() {
                "nodes" => {
                    declared_nodes = Some(value.trim().parse().map_err(|e| header(format!("nodes: {e}")))?)
                }
                "params" => params = Some(value.trim().parse::<GenParams>().map_err(header)?),
                _ => {}
            }
            continue;
        }
        let malformed = || ParseError::Malformed {
            line,
            text: raw.to_string(),
        };
        let mut fields = row.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(malformed());
        };
        let u: u64 = a.parse().map_err(|_| malformed())?;
        let v: u64 = b.parse().map_err(|_| malformed())?;
        if u == v {
            return Err(ParseError::SelfLoop { line, node: u });
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key, line).is_some() {
            return Err(ParseError::Duplicate { line, u, v });
        }
        rows.push(key);
    }

    let max_id = rows.iter().map(|&(_, v)| v).max();
    let mut warnings = Vec::new();
    let mut remap = None;
    let node_count = match (declared_nodes, max_id) {
        (Some(n), Some(max)) if max < n => n as usize,
        (Some(n), None) => n as usize,
        (declared, _) => {
            let mut ids: Vec<u64> = rows.iter().flat_map(|&(u, v)| [u, v]).collect();
            ids.sort_unstable();
            ids.dedup();
            let dense = ids.iter().enumerate().all(|(i, &id)| i as u64 == id);
            if let Some(n) = declared {
                warnings.push(format!("header declares {n} nodes but ids reach {}", max_id.unwrap_or(0)));
            }
            if !dense {
                warnings.push(format!("node ids are not dense; compacted {} ids to 0..{}", ids.len(), ids.len()));
                let lookup: BTreeMap<u64, u64> = ids.iter().enumerate().map(|(i, &id)| (id, i as u64)).collect();
                for row in &mut rows {
                    *row = (lookup[&row.0], lookup[&row.1]);
                }
                remap = Some(ids.clone());
            }
            ids.len()
        }
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    let graph = Graph::from_edges(node_count, rows.iter().map(|&(u, v)| (u as usize, v as usize)))
        .expect("rows were validated");
    Ok(EdgeListDocument {
        graph,
        params,
        remap,
        warnings,
    })
}

/// `node_id<TAB>group_id` rows in node order.
pub fn write_partition(p: &Partition) -> String {
    let mut out = String::with_capacity(12 * p.node_count());
    for (u, g) in p.assignment().iter().enumerate() {
        let _ = writeln!(out, "{u}\t{g}");
    }
    out
}

/// Reads a partition table covering nodes `0..n` exactly once each.
pub fn read_partition(text: &str, kind: PartitionKind) -> Result<Partition, ParseError> {
    let mut labels: BTreeMap<u64, u64> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }
        let malformed = || ParseError::Malformed {
            line,
            text: raw.to_string(),
        };
        let mut fields = row.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(malformed());
        };
        let node: u64 = a.parse().map_err(|_| malformed())?;
        let group: u64 = b.parse().map_err(|_| malformed())?;
        if labels.insert(node, group).is_some() {
            return Err(ParseError::DuplicateNode { line, node });
        }
    }
    let assignment: Vec<u64> = labels
        .iter()
        .enumerate()
        .map(|(i, (&node, &group))| if node == i as u64 { Ok(group) } else { Err(ParseError::MissingNode(i)) })
        .collect::<Result<_, _>>()?;
    Ok(Partition::from_assignment(&assignment, kind))
}

/// GraphML export. With a partition, every node carries a `community` data value.
pub fn write_graphml(g: &Graph, p: Option<&Partition>) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
         http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n",
    );
    if p.is_some() {
        out.push_str("  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n");
    }
    out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for u in g.nodes() {
        match p {
            Some(p) => {
                let _ = writeln!(
                    out,
                    "    <node id=\"n{u}\"><data key=\"community\">{}</data></node>",
                    p.group_of(u)
                );
            }
            None => {
                let _ = writeln!(out, "    <node id=\"n{u}\"/>");
            }
        }
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "    <edge source=\"n{u}\" target=\"n{v}\"/>");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// Fill colors for the ten largest groups, largest first.
pub const DOT_PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf",
    "#000080",
];
/// Fill color for every group outside the ten largest.
pub const DOT_FALLBACK_COLOR: &str = "#ffff00";

/// Group color under the DOT palette rule, keyed by group index.
pub fn group_colors(p: &Partition) -> Vec<&'static str> {
    let mut colors = vec![DOT_FALLBACK_COLOR; p.group_count()];
    for (rank, group) in p.largest_groups(DOT_PALETTE.len()).into_iter().enumerate() {
        colors[group] = DOT_PALETTE[rank];
    }
    colors
}

/// Graphviz DOT export. With a partition, nodes are filled with their group's color.
pub fn write_dot(g: &Graph, p: Option<&Partition>) -> String {
    let mut out = String::from("graph G {\n");
    match p {
        Some(p) => {
            out.push_str("  node [style=filled];\n");
            let colors = group_colors(p);
            for u in g.nodes() {
                let _ = writeln!(out, "  {u} [fillcolor=\"{}\"];", colors[p.group_of(u)]);
            }
        }
        None => {
            for u in g.nodes() {
                let _ = writeln!(out, "  {u};");
            }
        }
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "  {u} -- {v};");
    }
    out.push_str("}\n");
    out
}

/// Parses node ids back out of GraphML `n<id>` identifiers.
pub fn graphml_node_index(id: &str) -> Option<NodeId> {
    id.strip_prefix('n')?.parse::<u32>().ok().map(NodeId)
}
