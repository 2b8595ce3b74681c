//! The line-based `.dg` graph format and the coloring output format.
//!
//! ```text
//! dg 1
//! param k 4
//! v 10
//! v 11
//! ce 10 11
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Coloring, CostReport, DecompositionGraph, GraphInput};

/// Parsed graph plus the external ids of its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFile {
    pub graph: DecompositionGraph,
    /// `ids[v]` is the id written in the file for dense vertex `v`.
    pub ids: Vec<u64>,
    pub k: Option<usize>,
}

impl GraphFile {
    /// Wrap a graph whose external ids are its dense ids.
    pub fn identity(graph: DecompositionGraph, k: Option<usize>) -> Self {
        let ids = (0..graph.vertex_count() as u64).collect();
        GraphFile { graph, ids, k }
    }
}

pub fn parse_graph_file(text: &str) -> Result<GraphFile> {
    let mut header = false;
    let mut k = None;
    let mut ids: Vec<u64> = Vec::new();
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut input = GraphInput::default();
    let mut edge_lines: Vec<usize> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if !header {
            if toks == ["dg", "1"] {
                header = true;
                continue;
            }
            return Err(Error::Parse { line, message: "expected header 'dg 1'".into() });
        }
        let id = |tok: &str| -> Result<u64> {
            tok.parse::<u64>().map_err(|_| Error::Parse { line, message: format!("bad vertex id '{tok}'") })
        };
        match (toks[0], toks.len()) {
            ("param", 3) if toks[1] == "k" => {
                let value = toks[2]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse { line, message: format!("bad k '{}'", toks[2]) })?;
                k = Some(value);
            }
            ("v", 2) => {
                let vid = id(toks[1])?;
                if index.insert(vid, ids.len()).is_some() {
                    return Err(Error::Parse { line, message: format!("duplicate vertex id {vid}") });
                }
                ids.push(vid);
            }
            ("ce" | "se" | "fe", 3) => {
                let mut ends = [0usize; 2];
                for (slot, tok) in ends.iter_mut().zip(&toks[1..]) {
                    let vid = id(tok)?;
                    *slot = *index
                        .get(&vid)
                        .ok_or_else(|| Error::Parse { line, message: format!("unknown vertex {vid}") })?;
                }
                let list = match toks[0] {
                    "ce" => &mut input.conflict_edges,
                    "se" => &mut input.stitch_edges,
                    _ => &mut input.friendly_edges,
                };
                list.push((ends[0], ends[1]));
                edge_lines.push(line);
            }
            _ => return Err(Error::Parse { line, message: format!("malformed line '{content}'") }),
        }
    }
    if !header {
        return Err(Error::Parse { line: 1, message: "missing header 'dg 1'".into() });
    }
    input.vertex_count = ids.len();
    if let Some(first) = input.validate().into_iter().next() {
        let last = edge_lines.last().copied().unwrap_or(1);
        return Err(Error::Parse { line: last, message: first.to_string() });
    }
    let graph = DecompositionGraph::try_from(input)?;
    Ok(GraphFile { graph, ids, k })
}

/// Canonical serialization: vertices in dense order, then `ce`, `se`, `fe`
/// lines each sorted by dense endpoint ids.
pub fn write_graph_file(file: &GraphFile) -> String {
    let mut out = String::from("dg 1\n");
    if let Some(k) = file.k {
        let _ = writeln!(out, "param k {k}");
    }
    for id in &file.ids {
        let _ = writeln!(out, "v {id}");
    }
    let g = &file.graph;
    for (tag, edges) in [("ce", g.conflict_edges()), ("se", g.stitch_edges())] {
        for e in edges {
            for _ in 0..e.weight {
                let _ = writeln!(out, "{tag} {} {}", file.ids[e.u], file.ids[e.v]);
            }
        }
    }
    for &(u, v) in g.friendly_edges() {
        let _ = writeln!(out, "fe {} {}", file.ids[u], file.ids[v]);
    }
    out
}

/// `color <id> <c>` lines followed by one summary line.
pub fn write_coloring(ids: &[u64], coloring: &Coloring, cost: &CostReport, time_ms: u64) -> String {
    let mut out = String::new();
    for (id, c) in ids.iter().zip(coloring.colors()) {
        let _ = writeln!(out, "color {id} {c}");
    }
    let _ =
        writeln!(out, "summary cn={} st={} cost={} time_ms={}", cost.conflicts, cost.stitches, cost.weighted, time_ms);
    out
}
