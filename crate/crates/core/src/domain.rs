//! Line-oriented domain-graph specs.
//!
//! ```text
//! # stage 1
//! node LIT101
//! node MV101
//! edge LIT101 -> MV101 : control
//! ```
//!
//! Nodes must be declared before edges that use them. Only `control` and
//! `physical` edges are accepted; cycles are allowed.

use thiserror::Error;

use crate::graph::{CausalGraph, EdgeKind, GraphError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("line {line}: unknown node `{name}`")]
    UnknownNode { line: usize, name: String },
}

impl DomainError {
    pub fn code(&self) -> &'static str {
        match self {
            DomainError::ParseError { .. } => "ParseError",
            DomainError::UnknownNode { .. } => "UnknownNode",
        }
    }
}

pub fn load_domain_graph(text: &str) -> Result<CausalGraph, DomainError> {
    let mut g = CausalGraph::new(Vec::<String>::new()).expect("empty graph");
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let parse = |reason: String| DomainError::ParseError { line, reason };
        let (keyword, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let rest = rest.trim();
        match keyword {
            "node" => {
                if rest.is_empty() || rest.contains(char::is_whitespace) {
                    return Err(parse(format!("expected `node NAME`, got `{body}`")));
                }
                g.add_node(rest).map_err(|e| parse(e.to_string()))?;
            }
            "edge" => {
                let (arc, kind) = rest
                    .split_once(':')
                    .ok_or_else(|| parse(format!("expected `edge SRC -> DST : KIND`, got `{body}`")))?;
                let (src, dst) = arc
                    .split_once("->")
                    .ok_or_else(|| parse(format!("missing `->` in `{body}`")))?;
                let (src, dst, kind) = (src.trim(), dst.trim(), kind.trim());
                let kind = match kind {
                    "control" => EdgeKind::Control,
                    "physical" => EdgeKind::Physical,
                    other => return Err(parse(format!("edge kind must be control or physical, got `{other}`"))),
                };
                for name in [src, dst] {
                    if name.is_empty() {
                        return Err(parse(format!("empty node name in `{body}`")));
                    }
                    if !g.contains(name) {
                        return Err(DomainError::UnknownNode { line, name: name.to_string() });
                    }
                }
                g.add_edge(src, dst, kind).map_err(|e| match e {
                    GraphError::UnknownNode(name) => DomainError::UnknownNode { line, name },
                    other => parse(other.to_string()),
                })?;
            }
            other => return Err(parse(format!("unknown directive `{other}`"))),
        }
    }
    Ok(g)
}

/// Inverse of [`load_domain_graph`] for graphs with control and physical edges.
pub fn format_domain_graph(g: &CausalGraph) -> String {
    let mut out = String::new();
    for n in g.nodes() {
        out.push_str(&format!("node {n}\n"));
    }
    for e in g.edges() {
        out.push_str(&format!("edge {} -> {} : {}\n", e.src, e.dst, e.kind));
    }
    out
}

/// Heuristic check used to tell a domain spec from graph JSON.
pub fn looks_like_domain_spec(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .map_or(true, |l| l.starts_with("node ") || l.starts_with("edge "))
}
